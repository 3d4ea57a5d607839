#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "gridhub/dialects.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/transforms.hpp"

namespace gridhub {

std::string phase_suffix(PhaseSet phases) {
    std::string s;
    for (Phase p : kAllPhases)
        if (phases.has(p)) s += "." + std::to_string(int(p) + 1);
    return s;
}

PhaseSet parse_phase_suffix(const std::string& suffix) {
    if (suffix.empty()) return PhaseSet::abc();
    PhaseSet out;
    size_t i = 0;
    int last = 0;
    while (i < suffix.size()) {
        if (suffix[i] != '.') throw ValidationError("malformed bus phase suffix \"" + suffix + "\"");
        ++i;
        if (i >= suffix.size() || suffix[i] < '1' || suffix[i] > '3')
            throw ValidationError("bus phase suffix digits must be 1..3: \"" + suffix + "\"");
        int d = suffix[i] - '0';
        if (d <= last)
            throw ValidationError("bus phase suffix must be strictly increasing: \"" + suffix + "\"");
        last = d;
        out.add(Phase(d - 1));
        ++i;
    }
    return out;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

std::string bus_ref(const std::string& node, PhaseSet phases) {
    return node + phase_suffix(phases);
}

std::string conn_token(WindingConfig c) {
    switch (c) {
        case WindingConfig::D: return "delta";
        case WindingConfig::Y: return "wye";
        default: return "wye-g";
    }
}

std::optional<WindingConfig> parse_conn(const std::string& token) {
    std::string t = lower(token);
    if (t == "delta" || t == "d") return WindingConfig::D;
    if (t == "wye" || t == "y") return WindingConfig::Y;
    if (t == "wye-g" || t == "yg" || t == "wye-grounded") return WindingConfig::Yg;
    return std::nullopt;
}

std::string list_of(const std::vector<std::string>& items) {
    std::string out = "(";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += " ";
        out += items[i];
    }
    return out + ")";
}

std::string per_phase_list(const std::array<double, 3>& values, PhaseSet phases) {
    std::vector<std::string> items;
    for (Phase p : kAllPhases)
        if (phases.has(p)) items.push_back(format_double(values[size_t(p)]));
    return list_of(items);
}

std::string matrix_value(const Mat3c& m, bool imag_part) {
    std::string out = "(";
    for (int i = 0; i < 3; ++i) {
        if (i) out += "|";
        for (int j = 0; j < 3; ++j) {
            if (j) out += " ";
            out += format_double(imag_part ? m(i, j).imag() : m(i, j).real());
        }
    }
    return out + ")";
}

void emit_kv(std::string& stmt, const char* key, const std::optional<double>& kv) {
    if (kv) stmt += std::string(" ") + key + "=" + format_double(*kv);
}

// ---------------------------------------------------------------------------
// import machinery

struct Statement {
    long line = 0;
    std::string cls;                       // lowercased
    std::string name;
    std::vector<std::pair<std::string, std::string>> keys; // lowercased key, raw value
    std::string cls_raw;
};

class StatementScanner {
  public:
    StatementScanner(const std::string& text) : text_(text) {}

    std::optional<Statement> next() {
        while (true) {
            if (!next_line()) return std::nullopt;
            std::string_view s = trimmed_;
            if (s.empty() || s.substr(0, 2) == "//" || s[0] == '!') continue;

            std::vector<std::string> tokens = tokenize(s);
            if (tokens.empty()) continue;
            std::string head = lower(tokens[0]);
            if (head == "clear") {
                if (tokens.size() > 1) fail("unexpected text after Clear");
                continue;
            }
            if (head != "new") fail("expected 'New <Class>.<Name>', got \"" + tokens[0] + "\"");
            if (tokens.size() < 2) fail("missing class after New");

            Statement st;
            st.line = line_no_;
            auto dot = tokens[1].find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 == tokens[1].size())
                fail("expected <Class>.<Name>, got \"" + tokens[1] + "\"");
            st.cls_raw = tokens[1].substr(0, dot);
            st.cls = lower(st.cls_raw);
            st.name = tokens[1].substr(dot + 1);

            for (size_t i = 2; i < tokens.size(); ++i) {
                auto eq = tokens[i].find('=');
                if (eq == std::string::npos || eq == 0)
                    fail("expected key=value, got \"" + tokens[i] + "\"");
                std::string key = lower(tokens[i].substr(0, eq));
                for (auto& [k, v] : st.keys)
                    if (k == key) fail("duplicate key '" + key + "'");
                st.keys.push_back({key, tokens[i].substr(eq + 1)});
            }
            return st;
        }
    }

    [[noreturn]] void fail(const std::string& message, long column = -1) const {
        throw ParseError("dss", line_no_, column, message);
    }

    long line_no() const { return line_no_; }

  private:
    bool next_line() {
        if (pos_ >= text_.size()) return false;
        size_t end = text_.find('\n', pos_);
        if (end == std::string::npos) end = text_.size();
        trimmed_ = std::string_view(text_).substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_no_;
        while (!trimmed_.empty() && (trimmed_.back() == '\r' || trimmed_.back() == ' ' ||
                                     trimmed_.back() == '\t'))
            trimmed_.remove_suffix(1);
        while (!trimmed_.empty() && (trimmed_.front() == ' ' || trimmed_.front() == '\t'))
            trimmed_.remove_prefix(1);
        return true;
    }

    // whitespace-separated, but parenthesized values stay one token
    std::vector<std::string> tokenize(std::string_view s) const {
        std::vector<std::string> out;
        std::string cur;
        int depth = 0;
        for (char c : s) {
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (depth < 0) fail("unbalanced ')'");
            if ((c == ' ' || c == '\t') && depth == 0) {
                if (!cur.empty()) out.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (depth != 0) fail("unbalanced '('");
        if (!cur.empty()) out.push_back(std::move(cur));
        return out;
    }

    const std::string& text_;
    size_t pos_ = 0;
    long line_no_ = 0;
    std::string_view trimmed_;
};

/// Key-value access over one statement with consumption tracking, so
/// anything left over is an unknown key.
class KeyBag {
  public:
    explicit KeyBag(const Statement& st) : st_(st), used_(st.keys.size(), false) {}

    std::optional<std::string> take(const std::string& key) {
        for (size_t i = 0; i < st_.keys.size(); ++i) {
            if (!used_[i] && st_.keys[i].first == key) {
                used_[i] = true;
                return st_.keys[i].second;
            }
        }
        return std::nullopt;
    }

    std::string require(const std::string& key) {
        auto v = take(key);
        if (!v) fail("missing required key '" + key + "' on " + st_.cls_raw + "." + st_.name);
        return *v;
    }

    double number(const std::string& key) { return to_number(key, require(key)); }

    std::optional<double> optional_number(const std::string& key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        return to_number(key, *v);
    }

    double number_or(const std::string& key, double fallback) {
        auto v = optional_number(key);
        return v ? *v : fallback;
    }

    bool flag_or(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        std::string t = lower(*v);
        if (t == "true" || t == "yes") return true;
        if (t == "false" || t == "no") return false;
        fail("key '" + key + "' expects true/false, got \"" + *v + "\"");
    }

    std::vector<std::string> list(const std::string& key, const std::string& raw) {
        if (raw.size() < 2 || raw.front() != '(' || raw.back() != ')')
            fail("key '" + key + "' expects a (…) list, got \"" + raw + "\"");
        std::istringstream in(raw.substr(1, raw.size() - 2));
        std::vector<std::string> items;
        std::string item;
        while (in >> item) items.push_back(item);
        return items;
    }

    /// Scalar value applies to every present phase; a list maps pairwise.
    std::array<double, 3> per_phase(const std::string& key, const std::string& raw,
                                    PhaseSet phases) {
        std::array<double, 3> out{};
        std::vector<std::string> items =
            raw.size() >= 2 && raw.front() == '(' ? list(key, raw) : std::vector<std::string>{raw};
        int n = 0;
        auto members = phases.members(n);
        if (int(items.size()) == 1 && n > 1) {
            double v = to_number(key, items[0]) / n;
            for (int i = 0; i < n; ++i) out[size_t(members[i])] = v;
            return out;
        }
        if (int(items.size()) != n)
            fail("key '" + key + "' has " + std::to_string(items.size()) + " values for " +
                 std::to_string(n) + " phases");
        for (int i = 0; i < n; ++i) out[size_t(members[i])] = to_number(key, items[i]);
        return out;
    }

    void finish(bool lenient, std::vector<std::string>* warnings) {
        for (size_t i = 0; i < st_.keys.size(); ++i) {
            if (used_[i]) continue;
            std::string msg = "UnknownKey: '" + st_.keys[i].first + "' on " + st_.cls_raw + "." +
                              st_.name + " (line " + std::to_string(st_.line) + ")";
            if (!lenient) throw ParseError("dss", st_.line, -1, msg);
            if (warnings) warnings->push_back(msg);
        }
    }

    [[noreturn]] void fail(const std::string& message) {
        throw ParseError("dss", st_.line, -1, message);
    }

    double to_number(const std::string& key, const std::string& text) {
        auto v = parse_double(text);
        if (!v) fail("key '" + key + "' has non-numeric value \"" + text + "\"");
        return *v;
    }

  private:
    const Statement& st_;
    std::vector<bool> used_;
};

struct BusAndPhases {
    std::string node;
    PhaseSet phases;
};

}  // namespace

std::string export_dss(const Circuit& c) {
    std::string out;
    out += "Clear\n";
    const Source& src = c.source();
    out += "New Circuit.main bus1=" + src.node + " basekv=" + format_double(src.kv_ll) +
           " pu=" + format_double(src.voltage_pu) + " angle=" + format_double(src.angle_deg) +
           "\n";

    for (const auto& n : c.nodes) {
        std::string stmt = "New Bus." + n.id;
        emit_kv(stmt, "kvll", n.nominal_kv_ll);
        if (n.coord) {
            stmt += " x=" + format_double(n.coord->first);
            stmt += " y=" + format_double(n.coord->second);
        }
        out += stmt + "\n";
    }

    for (const auto& l : c.lines) {
        std::string stmt = "New Line." + l.id + " bus1=" + bus_ref(l.from_node, l.phases) +
                           " bus2=" + bus_ref(l.to_node, l.phases);
        if (l.has_sequence()) {
            const auto& s = l.sequence();
            stmt += " r1=" + format_double(s.r1) + " x1=" + format_double(s.x1) +
                    " r0=" + format_double(s.r0) + " x0=" + format_double(s.x0) +
                    " b1=" + format_double(s.b1) + " b0=" + format_double(s.b0);
        } else {
            const auto& m = l.matrix();
            stmt += " rmatrix=" + matrix_value(m.z, false) +
                    " xmatrix=" + matrix_value(m.z, true) +
                    " bmatrix=" + matrix_value(m.b_shunt, false);
        }
        stmt += " length=" + format_double(l.length_ft) + " units=ft";
        stmt += " amps=" + per_phase_list(l.ampacity, l.phases);
        stmt += std::string(" kind=") + (l.kind == LineKind::Cable ? "cable" : "overhead");
        out += stmt + "\n";
    }

    for (const auto& t : c.transformers) {
        TransformerImpedance z = transformer_impedance(t);
        out += "New Transformer." + t.id + " buses=" + list_of({t.from_node, t.to_node}) +
               " conns=" + list_of({conn_token(t.prim_config), conn_token(t.sec_config)}) +
               " kvs=" + list_of({format_double(t.prim_kv_ll), format_double(t.sec_kv_ll)}) +
               " kvas=" + list_of({format_double(t.kva_rating)}) +
               " xhl=" + format_double(z.x1_pu * 100) + " pctr=" + format_double(z.r1_pu * 100) +
               " xhl0=" + format_double(z.x0_pu * 100) +
               " pctr0=" + format_double(z.r0_pu * 100) + "\n";
    }

    for (const auto& s : c.switches) {
        out += "New Switch." + s.id + " bus1=" + bus_ref(s.from_node, s.phases) +
               " bus2=" + bus_ref(s.to_node, s.phases) +
               " status=" + (s.status == SwitchStatus::Closed ? "closed" : "open") + "\n";
    }

    for (const auto& b : c.capacitors) {
        std::string stmt = "New Capacitor." + b.id + " bus1=" + bus_ref(b.node, b.phases) +
                           " conn=" + conn_token(b.config) + " kv=" + format_double(b.rated_kv) +
                           " kvar=" + format_double(b.total_kvar) +
                           " status=" + (b.status == CapStatus::On ? "on" : "off");
        if (b.sense_on_v) stmt += " senseon=" + format_double(*b.sense_on_v);
        if (b.sense_off_v) stmt += " senseoff=" + format_double(*b.sense_off_v);
        if (b.pt_ratio) stmt += " ptratio=" + format_double(*b.pt_ratio);
        if (b.control_voltage_node) stmt += " ctrlbus=" + *b.control_voltage_node;
        if (b.synthetic) stmt += " synthetic=true";
        out += stmt + "\n";
    }

    for (const auto& l : c.loads) {
        std::string stmt = "New Load." + l.id + " bus1=" + bus_ref(l.node, l.phases) +
                           " conn=" + conn_token(l.config);
        emit_kv(stmt, "kv", l.rated_kv);
        stmt += " kw=" + per_phase_list(l.kw_per_phase, l.phases) +
                " kvar=" + per_phase_list(l.kvar_per_phase, l.phases);
        out += stmt + "\n";
    }

    for (const auto& g : c.generators) {
        std::string stmt = "New Generator." + g.id + " bus1=" + bus_ref(g.node, g.phases) +
                           " conn=" + conn_token(g.config);
        emit_kv(stmt, "kv", g.rated_kv);
        stmt += " kw=" + per_phase_list(g.kw_per_phase, g.phases) +
                " kvar=" + per_phase_list(g.kvar_per_phase, g.phases);
        out += stmt + "\n";
    }

    return out;
}

Circuit import_dss(const std::string& text, const DialectOptions& opts,
                   std::vector<std::string>* warnings) {
    Circuit c;
    std::map<std::string, bool> node_seen;

    auto ensure_node = [&](const std::string& id) {
        if (!node_seen.count(id)) {
            node_seen[id] = true;
            c.nodes.push_back({id, std::nullopt, std::nullopt});
        }
    };

    auto split_bus = [&](KeyBag& kb, const std::string& key) {
        std::string raw = kb.require(key);
        auto dot = raw.find('.');
        BusAndPhases out;
        out.node = raw.substr(0, dot == std::string::npos ? raw.size() : dot);
        if (out.node.empty()) kb.fail("empty bus name in '" + key + "'");
        try {
            out.phases = parse_phase_suffix(dot == std::string::npos ? "" : raw.substr(dot));
        } catch (const ValidationError& e) {
            kb.fail(e.what());
        }
        ensure_node(out.node);
        return out;
    };

    StatementScanner scanner(text);
    while (auto st_opt = scanner.next()) {
        Statement& st = *st_opt;
        KeyBag kb(st);

        if (st.cls == "circuit") {
            Source src;
            src.node = kb.require("bus1");
            if (src.node.find('.') != std::string::npos)
                kb.fail("source bus must not carry a phase suffix");
            ensure_node(src.node);
            src.kv_ll = kb.number("basekv");
            src.voltage_pu = kb.number_or("pu", 1.0);
            src.angle_deg = kb.number_or("angle", 0.0);
            c.sources.push_back(src);
        } else if (st.cls == "bus") {
            ensure_node(st.name);
            auto it = std::find_if(c.nodes.begin(), c.nodes.end(),
                                   [&](const Node& nd) { return nd.id == st.name; });
            Node& n = *it;
            n.nominal_kv_ll = kb.optional_number("kvll");
            auto x = kb.optional_number("x");
            auto y = kb.optional_number("y");
            if (x.has_value() != y.has_value()) kb.fail("bus coordinate needs both x and y");
            if (x) n.coord = {*x, *y};
        } else if (st.cls == "line") {
            LineSegment l;
            l.id = st.name;
            BusAndPhases b1 = split_bus(kb, "bus1");
            BusAndPhases b2 = split_bus(kb, "bus2");
            if (b1.phases != b2.phases)
                kb.fail("bus1/bus2 phase suffixes disagree on Line." + st.name);
            l.from_node = b1.node;
            l.to_node = b2.node;
            l.phases = b1.phases;

            auto rmatrix = kb.take("rmatrix");
            if (rmatrix) {
                PhaseImpedanceMatrix m;
                auto fill = [&](const std::string& key, const std::string& raw, Mat3c& dst,
                                bool imag_part) {
                    std::vector<std::vector<std::string>> rows;
                    if (raw.size() < 2 || raw.front() != '(' || raw.back() != ')')
                        kb.fail("key '" + key + "' expects (row|row|row)");
                    std::string body = raw.substr(1, raw.size() - 2);
                    std::istringstream rows_in(body);
                    std::string row;
                    while (std::getline(rows_in, row, '|')) {
                        std::istringstream in(row);
                        std::vector<std::string> items;
                        std::string item;
                        while (in >> item) items.push_back(item);
                        rows.push_back(items);
                    }
                    if (rows.size() != 3) kb.fail("key '" + key + "' needs 3 rows");
                    for (int i = 0; i < 3; ++i) {
                        if (rows[size_t(i)].size() != 3)
                            kb.fail("key '" + key + "' row " + std::to_string(i + 1) +
                                    " needs 3 values");
                        for (int j = 0; j < 3; ++j) {
                            double v = kb.to_number(key, rows[size_t(i)][size_t(j)]);
                            if (imag_part)
                                dst(i, j) = Complex(dst(i, j).real(), v);
                            else
                                dst(i, j) = Complex(v, dst(i, j).imag());
                        }
                    }
                };
                fill("rmatrix", *rmatrix, m.z, false);
                fill("xmatrix", kb.require("xmatrix"), m.z, true);
                auto bmatrix = kb.take("bmatrix");
                if (bmatrix) fill("bmatrix", *bmatrix, m.b_shunt, false);
                l.impedance = m;
            } else {
                SequenceImpedance s;
                s.r1 = kb.number("r1");
                s.x1 = kb.number("x1");
                s.r0 = kb.number("r0");
                s.x0 = kb.number("x0");
                s.b1 = kb.number_or("b1", 0.0);
                s.b0 = kb.number_or("b0", 0.0);
                l.impedance = s;
            }

            l.length_ft = kb.number_or("length", 0.0);
            auto units = kb.take("units");
            if (units && lower(*units) != "ft")
                kb.fail("only units=ft is supported, got \"" + *units + "\"");
            auto amps = kb.take("amps");
            if (amps) l.ampacity = kb.per_phase("amps", *amps, l.phases);
            auto kind = kb.take("kind");
            if (kind) {
                std::string k = lower(*kind);
                if (k == "cable") l.kind = LineKind::Cable;
                else if (k == "overhead") l.kind = LineKind::Overhead;
                else kb.fail("kind must be cable or overhead, got \"" + *kind + "\"");
            }
            c.lines.push_back(std::move(l));
        } else if (st.cls == "transformer") {
            TransformerSpec t;
            t.id = st.name;
            auto buses = kb.list("buses", kb.require("buses"));
            auto conns = kb.list("conns", kb.require("conns"));
            auto kvs = kb.list("kvs", kb.require("kvs"));
            auto kvas = kb.list("kvas", kb.require("kvas"));
            if (buses.size() != 2 || conns.size() != 2 || kvs.size() != 2)
                kb.fail("transformer needs two windings in buses/conns/kvs");
            if (kvas.empty() || kvas.size() > 2) kb.fail("kvas needs one or two values");
            t.from_node = buses[0];
            t.to_node = buses[1];
            ensure_node(t.from_node);
            ensure_node(t.to_node);
            for (int w = 0; w < 2; ++w) {
                auto conn = parse_conn(conns[size_t(w)]);
                if (!conn) kb.fail("unknown connection \"" + conns[size_t(w)] + "\"");
                (w == 0 ? t.prim_config : t.sec_config) = *conn;
            }
            t.prim_kv_ll = kb.to_number("kvs", kvs[0]);
            t.sec_kv_ll = kb.to_number("kvs", kvs[1]);
            t.kva_rating = kb.to_number("kvas", kvas[0]);
            if (kvas.size() == 2 && kb.to_number("kvas", kvas[1]) != t.kva_rating)
                kb.fail("unequal winding kVA ratings are not supported");

            double xhl = kb.number("xhl");
            double pctr = kb.number("pctr");
            double xhl0 = kb.number_or("xhl0", xhl);
            double pctr0 = kb.number_or("pctr0", pctr);
            if (pctr <= 0 || pctr0 <= 0) kb.fail("pctr/pctr0 must be positive");
            t.z1_pct = std::hypot(pctr, xhl);
            t.x1r1_ratio = xhl / pctr;
            t.z0_pct = std::hypot(pctr0, xhl0);
            t.x0r0_ratio = xhl0 / pctr0;
            c.transformers.push_back(std::move(t));
        } else if (st.cls == "switch") {
            Switch s;
            s.id = st.name;
            BusAndPhases b1 = split_bus(kb, "bus1");
            BusAndPhases b2 = split_bus(kb, "bus2");
            if (b1.phases != b2.phases)
                kb.fail("bus1/bus2 phase suffixes disagree on Switch." + st.name);
            s.from_node = b1.node;
            s.to_node = b2.node;
            s.phases = b1.phases;
            std::string status = lower(kb.require("status"));
            if (status == "closed") s.status = SwitchStatus::Closed;
            else if (status == "open") s.status = SwitchStatus::Open;
            else kb.fail("status must be closed or open, got \"" + status + "\"");
            c.switches.push_back(std::move(s));
        } else if (st.cls == "capacitor") {
            CapacitorBank b;
            b.id = st.name;
            BusAndPhases bus = split_bus(kb, "bus1");
            b.node = bus.node;
            b.phases = bus.phases;
            auto conn = parse_conn(kb.require("conn"));
            if (!conn) kb.fail("unknown connection on Capacitor." + st.name);
            b.config = *conn;
            b.rated_kv = kb.number("kv");
            b.total_kvar = kb.number("kvar");
            std::string status = lower(kb.require("status"));
            if (status == "on") b.status = CapStatus::On;
            else if (status == "off") b.status = CapStatus::Off;
            else kb.fail("status must be on or off, got \"" + status + "\"");
            b.sense_on_v = kb.optional_number("senseon");
            b.sense_off_v = kb.optional_number("senseoff");
            b.pt_ratio = kb.optional_number("ptratio");
            if (auto ctrl = kb.take("ctrlbus")) {
                ensure_node(*ctrl);
                b.control_voltage_node = *ctrl;
            }
            b.synthetic = kb.flag_or("synthetic", false);
            c.capacitors.push_back(std::move(b));
        } else if (st.cls == "load" || st.cls == "generator") {
            std::string id = st.name;
            BusAndPhases bus = split_bus(kb, "bus1");
            auto conn = parse_conn(kb.require("conn"));
            if (!conn) kb.fail("unknown connection on " + st.cls_raw + "." + st.name);
            auto kv = kb.optional_number("kv");
            auto kw = kb.per_phase("kw", kb.require("kw"), bus.phases);
            auto kvar = kb.per_phase("kvar", kb.require("kvar"), bus.phases);
            if (st.cls == "load") {
                c.loads.push_back({id, bus.node, bus.phases, *conn, kw, kvar, kv});
            } else {
                c.generators.push_back({id, bus.node, bus.phases, *conn, kw, kvar, kv});
            }
        } else {
            std::string msg = "unknown statement class '" + st.cls_raw + "' (line " +
                              std::to_string(st.line) + ")";
            if (!opts.lenient) throw ParseError("dss", st.line, -1, msg);
            if (warnings) warnings->push_back(msg);
            continue;
        }

        kb.finish(opts.lenient, warnings);
    }

    return build_circuit(std::move(c));
}

}  // namespace gridhub
