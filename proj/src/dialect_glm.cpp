#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "gridhub/dialects.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/transforms.hpp"

namespace gridhub {

namespace {

// nominal_voltage resolution is one millivolt; import snaps the implied kV
// back to the nearest short decimal within this relative tolerance.
constexpr double kKvSnapTol = 5e-6;

std::string trim_fixed(double v, int decimals) {
    std::string s = format_fixed(v, decimals);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s;
}

struct GlmBlock {
    long line = 0; // line of the "object" keyword
    std::string cls;
    std::vector<std::pair<std::string, std::string>> props;
    std::vector<bool> used;
};

class GlmScanner {
  public:
    explicit GlmScanner(const std::string& text) : text_(text) {}

    std::optional<GlmBlock> next() {
        skip_ws();
        if (pos_ >= text_.size()) return std::nullopt;

        GlmBlock block;
        block.line = line_;
        std::string kw = word();
        if (kw != "object") fail("expected 'object', got \"" + kw + "\"");
        skip_ws();
        block.cls = word();
        if (block.cls.empty()) fail("missing object class");
        skip_ws();
        expect('{');

        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) fail("unterminated object block");
            if (text_[pos_] == '}') {
                ++pos_;
                break;
            }
            std::string key = word();
            if (key.empty()) fail("expected a property name");
            skip_ws();
            std::string value;
            while (pos_ < text_.size() && text_[pos_] != ';' && text_[pos_] != '}' &&
                   text_[pos_] != '\n')
                value += text_[pos_++];
            if (pos_ >= text_.size() || text_[pos_] != ';')
                fail("property '" + key + "' is missing its ';'");
            ++pos_;
            while (!value.empty() && (value.back() == ' ' || value.back() == '\t'))
                value.pop_back();
            block.props.push_back({key, value});
        }
        block.used.assign(block.props.size(), false);
        return block;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError("glm", line_, -1, message);
    }

    long line() const { return line_; }

  private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string word() {
        std::string out;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                c == '\'') {
                out += c;
                ++pos_;
            } else {
                break;
            }
        }
        return out;
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    const std::string& text_;
    size_t pos_ = 0;
    long line_ = 1;
};

class PropBag {
  public:
    PropBag(GlmBlock& block, const std::string& display) : b_(block), display_(display) {}

    std::optional<std::string> take(const std::string& key) {
        for (size_t i = 0; i < b_.props.size(); ++i) {
            if (!b_.used[i] && b_.props[i].first == key) {
                b_.used[i] = true;
                return b_.props[i].second;
            }
        }
        return std::nullopt;
    }

    std::string require(const std::string& key) {
        auto v = take(key);
        if (!v) fail("missing property '" + key + "'");
        return *v;
    }

    double number(const std::string& key) { return to_number(key, require(key)); }

    std::optional<double> optional_number(const std::string& key) {
        auto v = take(key);
        if (!v) return std::nullopt;
        return to_number(key, *v);
    }

    Complex complex_value(const std::string& key, const std::string& raw) {
        auto v = parse_complex(raw);
        if (!v) fail("property '" + key + "' has malformed complex value \"" + raw + "\"");
        return *v;
    }

    PhaseSet phases(const std::string& key) {
        std::string raw = require(key);
        try {
            return PhaseSet::parse(raw);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }

    WindingConfig config(const std::string& key) {
        std::string raw = require(key);
        try {
            return parse_config(raw);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }

    bool flag_or(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (*v == "true") return true;
        if (*v == "false") return false;
        fail("property '" + key + "' expects true/false, got \"" + *v + "\"");
    }

    void finish(bool lenient, std::vector<std::string>* warnings) {
        for (size_t i = 0; i < b_.props.size(); ++i) {
            if (b_.used[i]) continue;
            std::string msg = "UnknownKey: '" + b_.props[i].first + "' on " + display_ +
                              " (line " + std::to_string(b_.line) + ")";
            if (!lenient) throw ParseError("glm", b_.line, -1, msg);
            if (warnings) warnings->push_back(msg);
        }
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError("glm", b_.line, -1, display_ + ": " + message);
    }

    double to_number(const std::string& key, const std::string& text) {
        auto v = parse_double(text);
        if (!v) fail("property '" + key + "' has non-numeric value \"" + text + "\"");
        return *v;
    }

  private:
    GlmBlock& b_;
    std::string display_;
};

void require_lowered(const Circuit& c) {
    for (const auto& l : c.lines) {
        if (l.has_sequence())
            throw ValidationError("NotLowered: sequence impedance present on segment " + l.id);
        if (!l.matrix().b_shunt.isZero(0.0))
            throw ValidationError("NotLowered: nonzero charging on segment " + l.id);
    }
    for (const auto& n : c.nodes) {
        if (!n.nominal_kv_ll)
            throw ValidationError("NotLowered: missing node voltage at " + n.id);
    }
}

class BlockWriter {
  public:
    BlockWriter(std::string& out, const std::string& cls) : out_(out) {
        out_ += "object " + cls + " {\n";
    }
    ~BlockWriter() { out_ += "}\n\n"; }

    void prop(const std::string& key, const std::string& value) {
        out_ += "  " + key + " " + value + ";\n";
    }
    void prop(const std::string& key, double v) { prop(key, format_double(v)); }
    void prop_complex(const std::string& key, Complex z) { prop(key, format_complex(z)); }

  private:
    std::string& out_;
};

}  // namespace

std::string export_glm(const Circuit& c) {
    require_lowered(c);

    std::string out;
    const Source& src = c.source();

    for (const auto& n : c.nodes) {
        BlockWriter w(out, "node");
        w.prop("name", n.id);
        w.prop("nominal_voltage", trim_fixed(kv_ll_to_v_ln(*n.nominal_kv_ll), 3));
        if (n.id == src.node) {
            w.prop("bustype", "SWING");
            w.prop("voltage_pu", src.voltage_pu);
            w.prop("angle_deg", src.angle_deg);
        }
        if (n.coord) {
            w.prop("x", n.coord->first);
            w.prop("y", n.coord->second);
        }
    }

    for (const auto& l : c.lines) {
        BlockWriter w(out, l.kind == LineKind::Cable ? "underground_line" : "overhead_line");
        w.prop("name", l.id);
        w.prop("from", l.from_node);
        w.prop("to", l.to_node);
        w.prop("phases", l.phases.to_string());
        w.prop("length", l.length_ft);
        const Mat3c& z = l.matrix().z;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                w.prop_complex("z" + std::to_string(i + 1) + std::to_string(j + 1), z(i, j));
        for (Phase p : kAllPhases)
            if (l.phases.has(p))
                w.prop("ampacity_" + std::string(phase_name(p)), l.ampacity[size_t(p)]);
    }

    for (const auto& t : c.transformers) {
        BlockWriter w(out, "transformer");
        w.prop("name", t.id);
        w.prop("from", t.from_node);
        w.prop("to", t.to_node);
        w.prop("kva", t.kva_rating);
        w.prop("primary_kv", t.prim_kv_ll);
        w.prop("secondary_kv", t.sec_kv_ll);
        w.prop("x1r1", t.x1r1_ratio);
        w.prop("x0r0", t.x0r0_ratio);
        w.prop("z1_pct", t.z1_pct);
        w.prop("z0_pct", t.z0_pct);
        w.prop("primary_config", std::string(config_name(t.prim_config)));
        w.prop("secondary_config", std::string(config_name(t.sec_config)));
    }

    for (const auto& s : c.switches) {
        BlockWriter w(out, "switch");
        w.prop("name", s.id);
        w.prop("from", s.from_node);
        w.prop("to", s.to_node);
        w.prop("phases", s.phases.to_string());
        w.prop("status", s.status == SwitchStatus::Closed ? "CLOSED" : "OPEN");
    }

    for (const auto& b : c.capacitors) {
        BlockWriter w(out, "capacitor");
        w.prop("name", b.id);
        w.prop("parent", b.node);
        w.prop("phases", b.phases.to_string());
        w.prop("config", std::string(config_name(b.config)));
        w.prop("rated_kv", b.rated_kv);
        w.prop("total_kvar", b.total_kvar);
        w.prop("status", b.status == CapStatus::On ? "ON" : "OFF");
        if (b.sense_on_v) w.prop("sense_on", *b.sense_on_v);
        if (b.sense_off_v) w.prop("sense_off", *b.sense_off_v);
        if (b.pt_ratio) w.prop("pt_ratio", *b.pt_ratio);
        if (b.control_voltage_node) w.prop("control_node", *b.control_voltage_node);
        if (b.synthetic) w.prop("synthetic", "true");
    }

    auto emit_powers = [](BlockWriter& w, PhaseSet phases, const std::array<double, 3>& kw,
                          const std::array<double, 3>& kvar) {
        for (Phase p : kAllPhases) {
            if (!phases.has(p)) continue;
            Complex s_va(kw[size_t(p)] * 1000.0, kvar[size_t(p)] * 1000.0);
            w.prop_complex("constant_power_" + std::string(phase_name(p)), s_va);
        }
    };

    for (const auto& l : c.loads) {
        BlockWriter w(out, "load");
        w.prop("name", l.id);
        w.prop("parent", l.node);
        w.prop("phases", l.phases.to_string());
        w.prop("config", std::string(config_name(l.config)));
        if (l.rated_kv) w.prop("rated_kv", *l.rated_kv);
        emit_powers(w, l.phases, l.kw_per_phase, l.kvar_per_phase);
    }

    for (const auto& g : c.generators) {
        BlockWriter w(out, "generator");
        w.prop("name", g.id);
        w.prop("parent", g.node);
        w.prop("phases", g.phases.to_string());
        w.prop("config", std::string(config_name(g.config)));
        if (g.rated_kv) w.prop("rated_kv", *g.rated_kv);
        emit_powers(w, g.phases, g.kw_per_phase, g.kvar_per_phase);
    }

    return out;
}

Circuit import_glm(const std::string& text, const DialectOptions& opts,
                   std::vector<std::string>* warnings) {
    Circuit c;
    long block_index = 0;

    auto ensure_node = [&](const std::string& id) {
        if (std::find_if(c.nodes.begin(), c.nodes.end(),
                         [&](const Node& n) { return n.id == id; }) == c.nodes.end())
            c.nodes.push_back({id, std::nullopt, std::nullopt});
    };

    GlmScanner scanner(text);
    while (auto block_opt = scanner.next()) {
        GlmBlock& block = *block_opt;
        ++block_index;

        // name is mandatory for every block we understand
        std::string name;
        for (size_t i = 0; i < block.props.size(); ++i) {
            if (block.props[i].first == "name") {
                name = block.props[i].second;
                block.used[i] = true;
                break;
            }
        }

        bool known =
            block.cls == "node" || block.cls == "underground_line" ||
            block.cls == "overhead_line" || block.cls == "transformer" ||
            block.cls == "switch" || block.cls == "capacitor" || block.cls == "load" ||
            block.cls == "generator";
        if (!known) {
            std::string msg = "unknown object class '" + block.cls + "' (line " +
                              std::to_string(block.line) + ")";
            if (!opts.lenient) throw ParseError("glm", block.line, -1, msg);
            if (warnings) warnings->push_back(msg);
            continue;
        }
        if (name.empty())
            throw ParseError("glm", block.line, -1,
                             "MissingName: object #" + std::to_string(block_index) + " (" +
                                 block.cls + ") has no name");

        PropBag bag(block, block.cls + " " + name);

        if (block.cls == "node") {
            ensure_node(name);
            auto it = std::find_if(c.nodes.begin(), c.nodes.end(),
                                   [&](const Node& n) { return n.id == name; });
            if (auto nominal = bag.optional_number("nominal_voltage"))
                it->nominal_kv_ll = shortest_within(v_ln_to_kv_ll(*nominal), kKvSnapTol);
            auto x = bag.optional_number("x");
            auto y = bag.optional_number("y");
            if (x.has_value() != y.has_value()) bag.fail("coordinate needs both x and y");
            if (x) it->coord = {*x, *y};
            if (auto bustype = bag.take("bustype")) {
                if (*bustype != "SWING")
                    bag.fail("only bustype SWING is supported, got \"" + *bustype + "\"");
                Source src;
                src.node = name;
                if (!it->nominal_kv_ll) bag.fail("SWING node needs nominal_voltage");
                src.kv_ll = *it->nominal_kv_ll;
                src.voltage_pu = bag.optional_number("voltage_pu").value_or(1.0);
                src.angle_deg = bag.optional_number("angle_deg").value_or(0.0);
                c.sources.push_back(src);
            }
        } else if (block.cls == "underground_line" || block.cls == "overhead_line") {
            LineSegment l;
            l.id = name;
            l.kind = block.cls == "underground_line" ? LineKind::Cable : LineKind::Overhead;
            l.from_node = bag.require("from");
            l.to_node = bag.require("to");
            ensure_node(l.from_node);
            ensure_node(l.to_node);
            l.phases = bag.phases("phases");
            l.length_ft = bag.optional_number("length").value_or(0.0);
            PhaseImpedanceMatrix m;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    std::string key = "z" + std::to_string(i + 1) + std::to_string(j + 1);
                    if (auto raw = bag.take(key)) m.z(i, j) = bag.complex_value(key, *raw);
                }
            l.impedance = m;
            for (Phase p : kAllPhases) {
                std::string key = "ampacity_" + std::string(phase_name(p));
                if (auto v = bag.optional_number(key)) {
                    if (!l.phases.has(p))
                        bag.fail("'" + key + "' given for a phase not in " +
                                 l.phases.to_string());
                    l.ampacity[size_t(p)] = *v;
                }
            }
            c.lines.push_back(std::move(l));
        } else if (block.cls == "transformer") {
            TransformerSpec t;
            t.id = name;
            t.from_node = bag.require("from");
            t.to_node = bag.require("to");
            ensure_node(t.from_node);
            ensure_node(t.to_node);
            t.kva_rating = bag.number("kva");
            t.prim_kv_ll = bag.number("primary_kv");
            t.sec_kv_ll = bag.number("secondary_kv");
            t.x1r1_ratio = bag.number("x1r1");
            t.x0r0_ratio = bag.number("x0r0");
            t.z1_pct = bag.number("z1_pct");
            t.z0_pct = bag.number("z0_pct");
            t.prim_config = bag.config("primary_config");
            t.sec_config = bag.config("secondary_config");
            c.transformers.push_back(std::move(t));
        } else if (block.cls == "switch") {
            Switch s;
            s.id = name;
            s.from_node = bag.require("from");
            s.to_node = bag.require("to");
            ensure_node(s.from_node);
            ensure_node(s.to_node);
            s.phases = bag.phases("phases");
            std::string status = bag.require("status");
            if (status == "CLOSED") s.status = SwitchStatus::Closed;
            else if (status == "OPEN") s.status = SwitchStatus::Open;
            else bag.fail("status must be CLOSED or OPEN, got \"" + status + "\"");
            c.switches.push_back(std::move(s));
        } else if (block.cls == "capacitor") {
            CapacitorBank b;
            b.id = name;
            b.node = bag.require("parent");
            ensure_node(b.node);
            b.phases = bag.phases("phases");
            b.config = bag.config("config");
            b.rated_kv = bag.number("rated_kv");
            b.total_kvar = bag.number("total_kvar");
            std::string status = bag.require("status");
            if (status == "ON") b.status = CapStatus::On;
            else if (status == "OFF") b.status = CapStatus::Off;
            else bag.fail("status must be ON or OFF, got \"" + status + "\"");
            b.sense_on_v = bag.optional_number("sense_on");
            b.sense_off_v = bag.optional_number("sense_off");
            b.pt_ratio = bag.optional_number("pt_ratio");
            if (auto ctrl = bag.take("control_node")) {
                ensure_node(*ctrl);
                b.control_voltage_node = *ctrl;
            }
            b.synthetic = bag.flag_or("synthetic", false);
            c.capacitors.push_back(std::move(b));
        } else { // load / generator
            std::string parent = bag.require("parent");
            ensure_node(parent);
            PhaseSet phases = bag.phases("phases");
            WindingConfig config = bag.config("config");
            auto rated_kv = bag.optional_number("rated_kv");
            std::array<double, 3> kw{}, kvar{};
            for (Phase p : kAllPhases) {
                std::string key = "constant_power_" + std::string(phase_name(p));
                auto raw = bag.take(key);
                if (!raw) continue;
                if (!phases.has(p))
                    bag.fail("'" + key + "' given for a phase not in " + phases.to_string());
                Complex s_va = bag.complex_value(key, *raw);
                kw[size_t(p)] = s_va.real() / 1000.0;
                kvar[size_t(p)] = s_va.imag() / 1000.0;
            }
            if (block.cls == "load")
                c.loads.push_back({name, parent, phases, config, kw, kvar, rated_kv});
            else
                c.generators.push_back({name, parent, phases, config, kw, kvar, rated_kv});
        }

        bag.finish(opts.lenient, warnings);
    }

    return build_circuit(std::move(c));
}

}  // namespace gridhub
