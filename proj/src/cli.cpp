#include "gridhub/cli.hpp"

#include <cstdio>

#include <CLI11.hpp>

#include "csv.hpp"
#include "gridhub/dialects.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/powerflow.hpp"
#include "gridhub/transforms.hpp"
#include "gridhub/workbook.hpp"

namespace gridhub {

namespace {

int exit_code_for(const Error& e) {
    switch (e.cls()) {
        case ErrorClass::Validation: return 1;
        case ErrorClass::Convergence: return 3;
        default: return 2; // parse and I/O trouble
    }
}

LoweringOptions preset_for(FormatTag format) {
    switch (format) {
        case FormatTag::Glm: return LoweringOptions::glm_preset();
        default: return LoweringOptions::dss_preset();
    }
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

struct ConvertArgs {
    std::string in, out;
    std::string in_format, out_format;
    bool lower = false;
    bool unlow = false;
    bool lenient = false;
};

int cmd_convert(const ConvertArgs& a) {
    FormatTag in_tag = parse_format_tag(a.in_format);
    FormatTag out_tag = parse_format_tag(a.out_format);

    Circuit c = import_any(a.in, in_tag, a.lenient);
    if (a.lower) c = lower_for_target(std::move(c), preset_for(out_tag));
    if (a.unlow) c = fold_charging_capacitors(std::move(c));
    export_any(c, a.out, out_tag);

    std::printf("%s -> %s: %s\n", a.in.c_str(), a.out.c_str(),
                summary_line(circuit_summary(c)).c_str());
    return 0;
}

int cmd_validate(const std::string& in, const std::string& in_format, bool lenient) {
    Circuit c = import_any(in, parse_format_tag(in_format), lenient);
    ValidationReport report = validate_topology(c);

    for (const auto& id : report.unreachable)
        std::printf("unreachable: node %s\n", id.c_str());
    for (const auto& cycle : report.cycles) {
        std::string ids;
        for (const auto& id : cycle) ids += (ids.empty() ? "" : ", ") + id;
        std::printf("cycle: [%s]\n", ids.c_str());
    }
    for (const auto& pv : report.phase_violations)
        std::printf("phase violation: %s: %s\n", pv.component.c_str(), pv.detail.c_str());
    for (const auto& w : report.warnings)
        std::printf("warning: %s: %s\n", w.component.c_str(), w.message.c_str());

    std::printf("%d findings\n", report.finding_count());
    return report.finding_count() == 0 ? 0 : 1;
}

int cmd_solve(const std::string& in, const std::string& in_format, bool lenient, double tol,
              int max_iter, const std::string& report_path) {
    Circuit c = import_any(in, parse_format_tag(in_format), lenient);
    c = propagate_nominal_voltages(std::move(c));

    SolveOptions opts;
    opts.tol_pu = tol;
    opts.max_iter = max_iter;
    PowerFlowSolution sol = solve(c, opts);

    std::printf("%s in %d iterations, max mismatch %s pu\n",
                sol.converged ? "converged" : "did not converge", sol.iterations,
                format_double(sol.max_mismatch_pu).c_str());
    if (!sol.converged) return 3;

    if (!report_path.empty()) {
        write_text_file(report_path, render_report(bus_power_table(sol)));
        std::printf("report written to %s\n", report_path.c_str());
    }
    return 0;
}

int cmd_compare(const std::string& report_a, const std::string& report_b, double rel_tol) {
    BusPowerTable a = parse_report(read_text_file(report_a), report_a);
    BusPowerTable b = parse_report(read_text_file(report_b), report_b);
    DiffReport d = compare_tables(a, b, rel_tol);
    std::fputs(render_diff(d).c_str(), stdout);
    return d.pass ? 0 : 4;
}

}  // namespace

FormatTag parse_format_tag(const std::string& text) {
    if (text == "up") return FormatTag::Up;
    if (text == "dss") return FormatTag::Dss;
    if (text == "glm") return FormatTag::Glm;
    throw ValidationError("unknown format \"" + text + "\" (expected up, dss, or glm)");
}

Circuit import_any(const std::string& path, FormatTag format, bool lenient) {
    DialectOptions opts{lenient};
    std::vector<std::string> warnings;
    Circuit c;
    switch (format) {
        case FormatTag::Up: c = read_workbook(path, WorkbookOptions{lenient}); break;
        case FormatTag::Dss: c = import_dss(read_text_file(path), opts, &warnings); break;
        case FormatTag::Glm: c = import_glm(read_text_file(path), opts, &warnings); break;
    }
    print_warnings(warnings);
    return c;
}

void export_any(const Circuit& c, const std::string& path, FormatTag format) {
    switch (format) {
        case FormatTag::Up: write_workbook(c, path); break;
        case FormatTag::Dss: write_text_file(path, export_dss(c)); break;
        case FormatTag::Glm: write_text_file(path, export_glm(c)); break;
    }
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"circuit model converter with a unified workbook hub"};
    app.require_subcommand(1);

    ConvertArgs conv;
    auto* convert = app.add_subcommand("convert", "convert between circuit model formats");
    convert->add_option("--in", conv.in, "input path")->required();
    convert->add_option("--in-format", conv.in_format, "up | dss | glm")->required();
    convert->add_option("--out", conv.out, "output path")->required();
    convert->add_option("--out-format", conv.out_format, "up | dss | glm")->required();
    convert->add_flag("--lower", conv.lower, "apply the output format's lowering preset");
    convert->add_flag("--unlow", conv.unlow,
                      "fold synthetic charging capacitors back into segment charging");
    convert->add_flag("--lenient", conv.lenient, "tolerate unknown keys/columns on import");

    std::string val_in, val_format{"up"};
    bool val_lenient = false;
    auto* validate = app.add_subcommand("validate", "report topology findings");
    validate->add_option("--in", val_in, "input path")->required();
    validate->add_option("--in-format", val_format, "up | dss | glm");
    validate->add_flag("--lenient", val_lenient, "tolerate unknown keys/columns on import");

    std::string solve_in, solve_format{"up"}, solve_report;
    bool solve_lenient = false;
    double solve_tol = 1e-8;
    int solve_max_iter = 50;
    auto* solve_cmd = app.add_subcommand("solve", "run the load-flow solver");
    solve_cmd->add_option("--in", solve_in, "input path")->required();
    solve_cmd->add_option("--in-format", solve_format, "up | dss | glm");
    solve_cmd->add_option("--tol", solve_tol, "per-unit voltage convergence tolerance");
    solve_cmd->add_option("--max-iter", solve_max_iter, "iteration cap");
    solve_cmd->add_option("--report", solve_report, "write the per-bus power report CSV here");
    solve_cmd->add_flag("--lenient", solve_lenient, "tolerate unknown keys/columns on import");

    std::string cmp_a, cmp_b;
    double cmp_tol = 0.002;
    auto* compare = app.add_subcommand("compare", "compare two per-bus power reports");
    compare->add_option("report_a", cmp_a, "first report CSV")->required();
    compare->add_option("report_b", cmp_b, "second report CSV")->required();
    compare->add_option("--rel-tol", cmp_tol, "relative tolerance for pass/fail");

    std::vector<const char*> argv;
    argv.push_back("gridhub");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (convert->parsed()) return cmd_convert(conv);
        if (validate->parsed()) return cmd_validate(val_in, val_format, val_lenient);
        if (solve_cmd->parsed())
            return cmd_solve(solve_in, solve_format, solve_lenient, solve_tol, solve_max_iter,
                             solve_report);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_tol);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return 2;
}

}  // namespace gridhub
