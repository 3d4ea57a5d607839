#include "gridhub/workbook.hpp"

#include <filesystem>
#include <map>
#include <set>

#include "csv.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/transforms.hpp"

namespace fs = std::filesystem;

namespace gridhub {

namespace {

const std::vector<std::string> kSheetNames = {
    "node", "cable", "overheadline", "transformer", "capacitor",
    "load", "generator", "breaker", "source"};

const std::vector<std::string> kCableHeader = {
    "Section Id", "From Node", "To Node", "Phase",
    "Line R1 Ohms", "Line X1 Ohms", "Line B1 uS",
    "Line R0 Ohms", "Line X0 Ohms", "Line B0 uS",
    "Length ft", "IA (Amps)", "IB (Amps)", "IC (Amps)"};

const std::map<std::string, std::vector<std::string>> kHeaders = {
    {"node", {"Node Id", "kV LL", "X", "Y"}},
    {"cable", kCableHeader},
    {"overheadline", kCableHeader},
    {"transformer",
     {"Section Id", "From Node", "To Node", "Cap Nom (kVA)", "Prim Volt (kVLL)",
      "Sec Volt (kVLL)", "X0 R0 Ratio", "X1 R1 Ratio", "Z0 (%)", "Z1 (%)",
      "Primary Config", "Secondary Config"}},
    {"capacitor",
     {"Section Id", "From Node", "Cap. Control Voltage", "Cap. Status", "kV",
      "Total Cap. Kvar", "Phase", "Config", "Sensing ON", "Sensing OFF", "PT Ratio"}},
    {"load",
     {"Section Id", "From Node", "Phase", "Config", "Spot kVAR A", "Spot kVAR B",
      "Spot kVAR C", "Spot kW A", "Spot kW B", "Spot kW C"}},
    {"generator",
     {"Section Id", "From Node", "Phase", "Config", "kW A", "kW B", "kW C",
      "kVAR A", "kVAR B", "kVAR C", "kV"}},
    {"breaker", {"Section Id", "From Node", "To Node", "Phase", "Status"}},
    {"source", {"Node", "kV LL", "Vpu", "Angle deg"}},
};

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

/// One data row with located cell access.
class RowReader {
  public:
    RowReader(std::string file, std::string sheet, const std::vector<std::string>* header,
              const CsvRow* row, long line)
        : file_(std::move(file)), sheet_(std::move(sheet)), header_(header), row_(row),
          line_(line) {}

    std::string raw(size_t col) const {
        return col < row_->size() ? (*row_)[col] : std::string();
    }

    std::string required_text(size_t col) const {
        std::string v = raw(col);
        if (v.empty())
            throw ParseError(file_, line_, long(col) + 1,
                             "MissingRequired: sheet '" + sheet_ + "' column '" + name(col) +
                                 "' is blank");
        return v;
    }

    std::optional<std::string> optional_text(size_t col) const {
        std::string v = raw(col);
        if (v.empty()) return std::nullopt;
        return v;
    }

    double required_number(size_t col) const {
        return number(required_text(col), col);
    }

    std::optional<double> optional_number(size_t col) const {
        std::string v = raw(col);
        if (v.empty()) return std::nullopt;
        return number(v, col);
    }

    double number_or_zero(size_t col) const {
        std::string v = raw(col);
        if (v.empty()) return 0;
        return number(v, col);
    }

    [[noreturn]] void fail(size_t col, const std::string& detail) const {
        throw ParseError(file_, line_, long(col) + 1,
                         "BadNumber: sheet '" + sheet_ + "' column '" + name(col) + "': " +
                             detail);
    }

    PhaseSet phases(size_t col) const {
        std::string v = required_text(col);
        try {
            return PhaseSet::parse(v);
        } catch (const ValidationError& e) {
            fail(col, e.what());
        }
    }

    WindingConfig config(size_t col) const {
        std::string v = required_text(col);
        try {
            return parse_config(v);
        } catch (const ValidationError& e) {
            fail(col, e.what());
        }
    }

    long line() const { return line_; }

  private:
    std::string name(size_t col) const {
        return col < header_->size() ? (*header_)[col] : "#" + std::to_string(col + 1);
    }

    double number(const std::string& text, size_t col) const {
        auto v = parse_double(text);
        if (!v) fail(col, "cannot parse \"" + text + "\" as a number");
        return *v;
    }

    std::string file_;
    std::string sheet_;
    const std::vector<std::string>* header_;
    const CsvRow* row_;
    long line_;
};

struct Sheet {
    std::string path;
    std::vector<CsvRow> rows;           // data rows only
    std::vector<long> lines;            // source line of each data row
    std::vector<size_t> extra_cols;     // lenient mode: positions beyond the canonical header
    std::vector<std::string> extra_headers;
};

Sheet load_sheet(const std::string& dir, const std::string& name, bool lenient) {
    Sheet sheet;
    sheet.path = (fs::path(dir) / (name + ".csv")).string();
    if (!fs::exists(sheet.path)) return sheet;

    auto rows = parse_csv(read_text_file(sheet.path), sheet.path);
    const auto& want = kHeaders.at(name);
    if (rows.empty())
        throw ParseError(sheet.path, 1, -1,
                         "HeaderMismatch: sheet '" + name + "': expected header \"" +
                             join(want) + "\", found empty file");

    const CsvRow& got = rows.front();
    bool prefix_ok = got.size() >= want.size();
    for (size_t i = 0; prefix_ok && i < want.size(); ++i)
        if (got[i] != want[i]) prefix_ok = false;
    bool exact = prefix_ok && got.size() == want.size();

    if (!exact && !(lenient && prefix_ok))
        throw ParseError(sheet.path, 1, -1,
                         "HeaderMismatch: sheet '" + name + "': expected \"" + join(want) +
                             "\", found \"" + join(got) + "\"");
    if (lenient && prefix_ok && !exact) {
        for (size_t i = want.size(); i < got.size(); ++i) {
            sheet.extra_cols.push_back(i);
            sheet.extra_headers.push_back(got[i]);
        }
    }

    for (size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() > got.size())
            throw ParseError(sheet.path, long(r) + 1, long(got.size()) + 1,
                             "row has more cells than the header");
        sheet.rows.push_back(rows[r]);
        sheet.lines.push_back(long(r) + 1);
    }
    return sheet;
}

void record_extras(Circuit& c, const std::string& name, const Sheet& sheet) {
    if (sheet.extra_cols.empty()) return;
    ExtraColumns ec;
    ec.headers = sheet.extra_headers;
    for (const auto& row : sheet.rows) {
        std::vector<std::string> cells;
        for (size_t col : sheet.extra_cols)
            cells.push_back(col < row.size() ? row[col] : std::string());
        ec.cells.push_back(std::move(cells));
    }
    c.extra_columns[name] = std::move(ec);
}

// Per-phase cells (A, B, C order starting at `first`): members parse
// blank-as-zero, absent phases must be blank or zero.
std::array<double, 3> phase_values(const RowReader& r, size_t first, PhaseSet phases) {
    std::array<double, 3> out{};
    for (Phase p : kAllPhases) {
        size_t col = first + size_t(p);
        double v = r.number_or_zero(col);
        if (!phases.has(p) && v != 0)
            r.fail(col, "value " + format_double(v) + " on phase " +
                            std::string(phase_name(p)) + " not in phases " +
                            phases.to_string());
        if (phases.has(p)) out[size_t(p)] = v;
    }
    return out;
}

LineSegment read_line_row(const RowReader& r, LineKind kind) {
    LineSegment l;
    l.id = r.required_text(0);
    l.from_node = r.required_text(1);
    l.to_node = r.required_text(2);
    l.phases = r.phases(3);
    SequenceImpedance s;
    s.r1 = r.required_number(4);
    s.x1 = r.required_number(5);
    s.b1 = r.required_number(6);
    s.r0 = r.required_number(7);
    s.x0 = r.required_number(8);
    s.b0 = r.required_number(9);
    l.impedance = s;
    l.length_ft = r.number_or_zero(10);
    l.ampacity = phase_values(r, 11, l.phases);
    l.kind = kind;
    return l;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

const std::vector<std::string>& workbook_sheet_names() { return kSheetNames; }

const std::vector<std::string>& workbook_sheet_header(const std::string& sheet) {
    auto it = kHeaders.find(sheet);
    if (it == kHeaders.end()) throw ValidationError("unknown sheet \"" + sheet + "\"");
    return it->second;
}

Circuit read_workbook(const std::string& dir, const WorkbookOptions& opts) {
    if (!fs::is_directory(dir)) throw IoError("workbook directory not found: " + dir);

    Circuit c;

    auto sheet_of = [&](const std::string& name) {
        return load_sheet(dir, name, opts.lenient);
    };

    {
        Sheet sh = sheet_of("node");
        const auto& hdr = kHeaders.at("node");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "node", &hdr, &sh.rows[i], sh.lines[i]);
            Node n;
            n.id = r.required_text(0);
            n.nominal_kv_ll = r.optional_number(1);
            auto x = r.optional_number(2);
            auto y = r.optional_number(3);
            if (x.has_value() != y.has_value())
                r.fail(x ? 3 : 2, "coordinate requires both X and Y");
            if (x) n.coord = {*x, *y};
            c.nodes.push_back(std::move(n));
        }
        record_extras(c, "node", sh);
    }

    for (const char* name : {"cable", "overheadline"}) {
        Sheet sh = sheet_of(name);
        const auto& hdr = kHeaders.at(name);
        LineKind kind = std::string(name) == "cable" ? LineKind::Cable : LineKind::Overhead;
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, name, &hdr, &sh.rows[i], sh.lines[i]);
            c.lines.push_back(read_line_row(r, kind));
        }
        record_extras(c, name, sh);
    }

    {
        Sheet sh = sheet_of("transformer");
        const auto& hdr = kHeaders.at("transformer");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "transformer", &hdr, &sh.rows[i], sh.lines[i]);
            TransformerSpec t;
            t.id = r.required_text(0);
            t.from_node = r.required_text(1);
            t.to_node = r.required_text(2);
            t.kva_rating = r.required_number(3);
            t.prim_kv_ll = r.required_number(4);
            t.sec_kv_ll = r.required_number(5);
            t.x0r0_ratio = r.required_number(6);
            t.x1r1_ratio = r.required_number(7);
            t.z0_pct = r.required_number(8);
            t.z1_pct = r.required_number(9);
            t.prim_config = r.config(10);
            t.sec_config = r.config(11);
            c.transformers.push_back(std::move(t));
        }
        record_extras(c, "transformer", sh);
    }

    {
        Sheet sh = sheet_of("capacitor");
        const auto& hdr = kHeaders.at("capacitor");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "capacitor", &hdr, &sh.rows[i], sh.lines[i]);
            CapacitorBank b;
            b.id = r.required_text(0);
            b.node = r.required_text(1);
            b.control_voltage_node = r.optional_text(2);
            std::string status = r.required_text(3);
            if (status == "On") b.status = CapStatus::On;
            else if (status == "Off") b.status = CapStatus::Off;
            else r.fail(3, "expected On or Off, got \"" + status + "\"");
            b.rated_kv = r.required_number(4);
            b.total_kvar = r.required_number(5);
            b.phases = r.phases(6);
            b.config = r.config(7);
            b.sense_on_v = r.optional_number(8);
            b.sense_off_v = r.optional_number(9);
            b.pt_ratio = r.optional_number(10);
            c.capacitors.push_back(std::move(b));
        }
        record_extras(c, "capacitor", sh);
    }

    {
        Sheet sh = sheet_of("load");
        const auto& hdr = kHeaders.at("load");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "load", &hdr, &sh.rows[i], sh.lines[i]);
            SpotLoad l;
            l.id = r.required_text(0);
            l.node = r.required_text(1);
            l.phases = r.phases(2);
            l.config = r.config(3);
            l.kvar_per_phase = phase_values(r, 4, l.phases);
            l.kw_per_phase = phase_values(r, 7, l.phases);
            c.loads.push_back(std::move(l));
        }
        record_extras(c, "load", sh);
    }

    {
        Sheet sh = sheet_of("generator");
        const auto& hdr = kHeaders.at("generator");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "generator", &hdr, &sh.rows[i], sh.lines[i]);
            Generator g;
            g.id = r.required_text(0);
            g.node = r.required_text(1);
            g.phases = r.phases(2);
            g.config = r.config(3);
            g.kw_per_phase = phase_values(r, 4, g.phases);
            g.kvar_per_phase = phase_values(r, 7, g.phases);
            g.rated_kv = r.optional_number(10);
            c.generators.push_back(std::move(g));
        }
        record_extras(c, "generator", sh);
    }

    {
        Sheet sh = sheet_of("breaker");
        const auto& hdr = kHeaders.at("breaker");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "breaker", &hdr, &sh.rows[i], sh.lines[i]);
            Switch s;
            s.id = r.required_text(0);
            s.from_node = r.required_text(1);
            s.to_node = r.required_text(2);
            s.phases = r.phases(3);
            std::string status = r.required_text(4);
            if (status == "Closed") s.status = SwitchStatus::Closed;
            else if (status == "Open") s.status = SwitchStatus::Open;
            else r.fail(4, "expected Closed or Open, got \"" + status + "\"");
            c.switches.push_back(std::move(s));
        }
        record_extras(c, "breaker", sh);
    }

    {
        Sheet sh = sheet_of("source");
        const auto& hdr = kHeaders.at("source");
        for (size_t i = 0; i < sh.rows.size(); ++i) {
            RowReader r(sh.path, "source", &hdr, &sh.rows[i], sh.lines[i]);
            Source s;
            s.node = r.required_text(0);
            s.kv_ll = r.required_number(1);
            s.voltage_pu = r.required_number(2);
            s.angle_deg = r.required_number(3);
            c.sources.push_back(s);
        }
        record_extras(c, "source", sh);
    }

    // Unknown sheet files ride along verbatim.
    std::set<std::string> known(kSheetNames.begin(), kSheetNames.end());
    std::vector<fs::path> extras;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        if (known.count(entry.path().stem().string())) continue;
        extras.push_back(entry.path());
    }
    std::sort(extras.begin(), extras.end());
    for (const auto& p : extras)
        c.extra_sheets.push_back({p.stem().string(), read_text_file(p.string())});

    return build_circuit(std::move(c));
}

void write_workbook(const Circuit& c, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create workbook directory " + dir + ": " + ec.message());

    std::map<std::string, std::vector<CsvRow>> sheets;
    for (const auto& name : kSheetNames) sheets[name] = {};

    for (const auto& n : c.nodes) {
        CsvRow row{n.id, format_optional(n.nominal_kv_ll), "", ""};
        if (n.coord) {
            row[2] = format_double(n.coord->first);
            row[3] = format_double(n.coord->second);
        }
        sheets["node"].push_back(std::move(row));
    }

    for (const auto& l : c.lines) {
        // The sheet schema is sequence-form; circulant phase matrices fold
        // back, anything else is not expressible.
        SequenceImpedance s;
        if (l.has_sequence()) {
            s = l.sequence();
        } else {
            try {
                s = phase_to_sequence(l.matrix());
            } catch (const ValidationError& e) {
                throw ValidationError("segment " + l.id +
                                      " cannot be written to the workbook: " + e.what());
            }
        }
        CsvRow row{l.id,
                   l.from_node,
                   l.to_node,
                   l.phases.to_string(),
                   format_double(s.r1),
                   format_double(s.x1),
                   format_double(s.b1),
                   format_double(s.r0),
                   format_double(s.x0),
                   format_double(s.b0),
                   format_double(l.length_ft)};
        for (Phase p : kAllPhases) row.push_back(format_double(l.ampacity[size_t(p)]));
        sheets[l.kind == LineKind::Cable ? "cable" : "overheadline"].push_back(std::move(row));
    }

    for (const auto& t : c.transformers) {
        sheets["transformer"].push_back(
            {t.id, t.from_node, t.to_node, format_double(t.kva_rating),
             format_double(t.prim_kv_ll), format_double(t.sec_kv_ll),
             format_double(t.x0r0_ratio), format_double(t.x1r1_ratio),
             format_double(t.z0_pct), format_double(t.z1_pct),
             std::string(config_name(t.prim_config)), std::string(config_name(t.sec_config))});
    }

    for (const auto& b : c.capacitors) {
        sheets["capacitor"].push_back(
            {b.id, b.node, b.control_voltage_node.value_or(""),
             b.status == CapStatus::On ? "On" : "Off", format_double(b.rated_kv),
             format_double(b.total_kvar), b.phases.to_string(),
             std::string(config_name(b.config)), format_optional(b.sense_on_v),
             format_optional(b.sense_off_v), format_optional(b.pt_ratio)});
    }

    for (const auto& l : c.loads) {
        CsvRow row{l.id, l.node, l.phases.to_string(), std::string(config_name(l.config))};
        for (Phase p : kAllPhases) row.push_back(format_double(l.kvar_per_phase[size_t(p)]));
        for (Phase p : kAllPhases) row.push_back(format_double(l.kw_per_phase[size_t(p)]));
        sheets["load"].push_back(std::move(row));
    }

    for (const auto& g : c.generators) {
        CsvRow row{g.id, g.node, g.phases.to_string(), std::string(config_name(g.config))};
        for (Phase p : kAllPhases) row.push_back(format_double(g.kw_per_phase[size_t(p)]));
        for (Phase p : kAllPhases) row.push_back(format_double(g.kvar_per_phase[size_t(p)]));
        row.push_back(format_optional(g.rated_kv));
        sheets["generator"].push_back(std::move(row));
    }

    for (const auto& s : c.switches) {
        sheets["breaker"].push_back({s.id, s.from_node, s.to_node, s.phases.to_string(),
                                     s.status == SwitchStatus::Closed ? "Closed" : "Open"});
    }

    for (const auto& s : c.sources) {
        sheets["source"].push_back({s.node, format_double(s.kv_ll),
                                    format_double(s.voltage_pu), format_double(s.angle_deg)});
    }

    for (const auto& name : kSheetNames) {
        std::vector<std::string> header = kHeaders.at(name);
        auto& rows = sheets[name];

        auto extra = c.extra_columns.find(name);
        if (extra != c.extra_columns.end()) {
            for (const auto& h : extra->second.headers) header.push_back(h);
            for (size_t i = 0; i < rows.size(); ++i) {
                if (i < extra->second.cells.size())
                    for (const auto& cell : extra->second.cells[i]) rows[i].push_back(cell);
            }
        }

        std::string text = csv_line(header) + "\n";
        for (const auto& row : rows) text += csv_line(row) + "\n";
        write_text_file((fs::path(dir) / (name + ".csv")).string(), text);
    }

    for (const auto& sheet : c.extra_sheets)
        write_text_file((fs::path(dir) / (sheet.name + ".csv")).string(), sheet.raw);
}

}  // namespace gridhub
