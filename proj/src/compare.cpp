#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "csv.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/powerflow.hpp"

namespace gridhub {

namespace {

const char* kReportHeader = "Bus,Active Power (kW),Reactive Power (kVAR)";

// Rows with differences at or below this always pass (near-zero quantities
// have no meaningful relative measure).
constexpr double kAbsFloor = 1.0; // kW / kVAR

}  // namespace

BusPowerTable bus_power_table(const PowerFlowSolution& s) {
    BusPowerTable t;
    for (const auto& bp : s.bus_through) t.rows.push_back({bp.id, bp.kw, bp.kvar});
    return t;
}

DiffReport compare_tables(const BusPowerTable& a, const BusPowerTable& b, double rel_tol) {
    DiffReport d;
    d.rel_tol = rel_tol;

    std::map<std::string, const BusPowerTable::Row*> in_b;
    for (const auto& row : b.rows) in_b[row.bus] = &row;
    std::map<std::string, bool> in_a;
    for (const auto& row : a.rows) in_a[row.bus] = true;

    double scale = 0;
    for (const auto& row : a.rows) scale = std::max({scale, std::abs(row.kw), std::abs(row.kvar)});
    for (const auto& row : b.rows) scale = std::max({scale, std::abs(row.kw), std::abs(row.kvar)});

    for (const auto& row : a.rows) {
        auto it = in_b.find(row.bus);
        if (it == in_b.end()) {
            d.missing_in_b.push_back(row.bus);
            continue;
        }
        auto add = [&](char q, double va, double vb) {
            DiffReport::Row r;
            r.bus = row.bus;
            r.quantity = q;
            r.value_a = va;
            r.value_b = vb;
            r.abs_diff = std::abs(va - vb);
            r.rel_diff = scale > 0 ? r.abs_diff / scale : 0.0;
            r.within = r.abs_diff <= kAbsFloor || r.rel_diff <= rel_tol;
            d.worst_rel_diff = std::max(d.worst_rel_diff, r.rel_diff);
            d.rows.push_back(std::move(r));
        };
        add('P', row.kw, it->second->kw);
        add('Q', row.kvar, it->second->kvar);
    }
    for (const auto& row : b.rows)
        if (!in_a.count(row.bus)) d.missing_in_a.push_back(row.bus);

    d.pass = d.missing_in_a.empty() && d.missing_in_b.empty() &&
             std::all_of(d.rows.begin(), d.rows.end(),
                         [](const DiffReport::Row& r) { return r.within; });
    return d;
}

DiffReport compare_solutions(const PowerFlowSolution& a, const PowerFlowSolution& b,
                             double rel_tol) {
    return compare_tables(bus_power_table(a), bus_power_table(b), rel_tol);
}

std::string render_report(const BusPowerTable& t) {
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& row : t.rows)
        out += row.bus + "," + format_fixed(row.kw, 1) + "," + format_fixed(row.kvar, 1) + "\n";
    return out;
}

BusPowerTable parse_report(const std::string& text, const std::string& file_for_errors) {
    auto rows = parse_csv(text, file_for_errors);
    if (rows.empty() || csv_line(rows.front()) != kReportHeader)
        throw ParseError(file_for_errors, 1, -1,
                         std::string("report header must be \"") + kReportHeader + "\"");
    BusPowerTable t;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 3)
            throw ParseError(file_for_errors, long(i) + 1, -1, "expected 3 cells per row");
        auto kw = parse_double(row[1]);
        auto kvar = parse_double(row[2]);
        if (row[0].empty() || !kw || !kvar)
            throw ParseError(file_for_errors, long(i) + 1, -1,
                             "malformed report row \"" + csv_line(row) + "\"");
        t.rows.push_back({row[0], *kw, *kvar});
    }
    return t;
}

std::string render_diff(const DiffReport& d) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-3s %14s %14s %12s %12s  %s\n", "bus", "qty", "a",
                  "b", "abs diff", "rel diff", "ok");
    out += buf;
    for (const auto& r : d.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-3c %14.3f %14.3f %12.4f %12.3e  %s\n",
                      r.bus.c_str(), r.quantity, r.value_a, r.value_b, r.abs_diff, r.rel_diff,
                      r.within ? "ok" : "FAIL");
        out += buf;
    }
    for (const auto& bus : d.missing_in_a) out += "missing in first report: " + bus + "\n";
    for (const auto& bus : d.missing_in_b) out += "missing in second report: " + bus + "\n";
    std::snprintf(buf, sizeof buf, "worst rel diff %.3e at tolerance %.3e: %s\n",
                  d.worst_rel_diff, d.rel_tol, d.pass ? "PASS" : "FAIL");
    out += buf;
    return out;
}

}  // namespace gridhub
