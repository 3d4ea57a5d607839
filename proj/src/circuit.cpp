#include "gridhub/circuit.hpp"

#include <cmath>
#include <unordered_set>

#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "radial_graph.hpp"

namespace gridhub {

int Circuit::node_index(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    return it == node_index_.end() ? -1 : it->second;
}

const Node& Circuit::node_at(std::string_view id) const {
    int i = node_index(id);
    if (i < 0) throw ValidationError("unknown node \"" + std::string(id) + "\"");
    return nodes[size_t(i)];
}

namespace {

void check_id_text(const std::string& id, const std::string& what) {
    if (id.empty()) throw ValidationError(what + " with empty id");
    for (char ch : id) {
        bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ||
                  ch == '\'';
        if (!ok)
            throw ValidationError("invalid character '" + std::string(1, ch) + "' in " + what +
                                  " id \"" + id + "\"");
    }
}

void check_positive(double v, const std::string& id, const char* field) {
    if (!(v > 0))
        throw ValidationError("InvalidComponent: " + id + ": " + field + " must be > 0, got " +
                              format_double(v));
}

void check_non_negative(double v, const std::string& id, const char* field) {
    if (!(v >= 0))
        throw ValidationError("InvalidComponent: " + id + ": " + field +
                              " must be >= 0, got " + format_double(v));
}

void check_node_ref(const Circuit& c, const std::string& component, const std::string& node) {
    if (!c.has_node(node))
        throw ValidationError("DanglingNodeRef: component \"" + component +
                              "\" references unknown node \"" + node + "\"");
}

void check_endpoints(const Circuit& c, const std::string& id, const std::string& from,
                     const std::string& to) {
    if (from == to)
        throw ValidationError("InvalidComponent: " + id + ": from and to node are both \"" +
                              from + "\"");
    check_node_ref(c, id, from);
    check_node_ref(c, id, to);
}

void check_phase_arrays(const std::string& id, PhaseSet phases,
                        const std::array<double, 3>& a, const char* what) {
    for (Phase p : kAllPhases) {
        if (!phases.has(p) && a[size_t(p)] != 0)
            throw ValidationError("InvalidComponent: " + id + ": nonzero " + what +
                                  " on phase " + std::string(phase_name(p)) +
                                  " not in phases " + phases.to_string());
    }
}

void check_delta_arity(const std::string& id, WindingConfig config, PhaseSet phases) {
    if (config == WindingConfig::D && phases.count() < 2)
        throw ValidationError("InvalidComponent: " + id +
                              ": delta connection requires at least two phases");
}

void check_impedance(const std::string& id, const Impedance& imp, PhaseSet phases) {
    if (std::holds_alternative<SequenceImpedance>(imp)) {
        const auto& s = std::get<SequenceImpedance>(imp);
        check_non_negative(s.r1, id, "r1");
        check_non_negative(s.r0, id, "r0");
        check_non_negative(s.b1, id, "b1");
        check_non_negative(s.b0, id, "b0");
        return;
    }
    const auto& m = std::get<PhaseImpedanceMatrix>(imp);
    double scale = m.z.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (std::abs(m.z(i, j) - m.z(j, i)) > 1e-12 * std::max(scale, 1e-300))
                throw ValidationError("InvalidComponent: " + id +
                                      ": phase impedance matrix is not symmetric");
            bool absent = !phases.has(Phase(i)) || !phases.has(Phase(j));
            if (absent && (m.z(i, j) != Complex(0, 0) || m.b_shunt(i, j) != Complex(0, 0)))
                throw ValidationError("InvalidComponent: " + id +
                                      ": nonzero matrix entry on absent phase row/col");
        }
    }
}

}  // namespace

Circuit build_circuit(Circuit parts) {
    Circuit c = std::move(parts);

    c.node_index_.clear();
    c.node_index_.reserve(c.nodes.size());
    for (int i = 0; i < int(c.nodes.size()); ++i) {
        const Node& n = c.nodes[size_t(i)];
        check_id_text(n.id, "node");
        if (!c.node_index_.emplace(n.id, i).second)
            throw ValidationError("DuplicateId: node \"" + n.id + "\"");
        if (n.nominal_kv_ll) check_positive(*n.nominal_kv_ll, n.id, "nominal kV");
    }

    std::unordered_set<std::string> component_ids;
    auto claim_id = [&](const std::string& id, const char* what) {
        check_id_text(id, what);
        if (!component_ids.insert(id).second)
            throw ValidationError("DuplicateId: component \"" + id + "\"");
    };

    for (const auto& l : c.lines) {
        claim_id(l.id, "line");
        check_endpoints(c, l.id, l.from_node, l.to_node);
        if (l.phases.empty())
            throw ValidationError("InvalidComponent: " + l.id + ": empty phase set");
        check_phase_arrays(l.id, l.phases, l.ampacity, "ampacity");
        check_non_negative(l.length_ft, l.id, "length");
        check_impedance(l.id, l.impedance, l.phases);
    }

    for (const auto& t : c.transformers) {
        claim_id(t.id, "transformer");
        check_endpoints(c, t.id, t.from_node, t.to_node);
        check_positive(t.kva_rating, t.id, "kVA rating");
        check_positive(t.prim_kv_ll, t.id, "primary kV");
        check_positive(t.sec_kv_ll, t.id, "secondary kV");
        check_positive(t.x1r1_ratio, t.id, "X1/R1 ratio");
        check_positive(t.x0r0_ratio, t.id, "X0/R0 ratio");
        check_positive(t.z1_pct, t.id, "Z1 %");
        check_positive(t.z0_pct, t.id, "Z0 %");
        bool y_y = t.prim_config != WindingConfig::D && t.sec_config != WindingConfig::D;
        if (t.prim_kv_ll == t.sec_kv_ll && !y_y)
            throw ValidationError("InvalidComponent: " + t.id +
                                  ": equal winding voltages are only valid for Y-Y units");
    }

    for (const auto& s : c.switches) {
        claim_id(s.id, "switch");
        check_endpoints(c, s.id, s.from_node, s.to_node);
        if (s.phases.empty())
            throw ValidationError("InvalidComponent: " + s.id + ": empty phase set");
    }

    for (const auto& b : c.capacitors) {
        claim_id(b.id, "capacitor");
        check_node_ref(c, b.id, b.node);
        check_positive(b.total_kvar, b.id, "total kvar");
        check_positive(b.rated_kv, b.id, "rated kV");
        if (b.phases.empty())
            throw ValidationError("InvalidComponent: " + b.id + ": empty phase set");
        check_delta_arity(b.id, b.config, b.phases);
        if (b.sense_on_v && b.sense_off_v && !(*b.sense_on_v < *b.sense_off_v))
            throw ValidationError("InvalidComponent: " + b.id +
                                  ": sensing ON must be below sensing OFF");
        if (b.control_voltage_node) check_node_ref(c, b.id, *b.control_voltage_node);
    }

    for (const auto& l : c.loads) {
        claim_id(l.id, "load");
        check_node_ref(c, l.id, l.node);
        if (l.phases.empty())
            throw ValidationError("InvalidComponent: " + l.id + ": empty phase set");
        check_delta_arity(l.id, l.config, l.phases);
        check_phase_arrays(l.id, l.phases, l.kw_per_phase, "kW");
        check_phase_arrays(l.id, l.phases, l.kvar_per_phase, "kvar");
        if (l.rated_kv) check_positive(*l.rated_kv, l.id, "rated kV");
    }

    for (const auto& g : c.generators) {
        claim_id(g.id, "generator");
        check_node_ref(c, g.id, g.node);
        if (g.phases.empty())
            throw ValidationError("InvalidComponent: " + g.id + ": empty phase set");
        check_delta_arity(g.id, g.config, g.phases);
        check_phase_arrays(g.id, g.phases, g.kw_per_phase, "kW");
        check_phase_arrays(g.id, g.phases, g.kvar_per_phase, "kvar");
        if (g.rated_kv) check_positive(*g.rated_kv, g.id, "rated kV");
    }

    if (c.sources.empty()) throw ValidationError("NoSource: circuit has no source");
    if (c.sources.size() > 1)
        throw ValidationError("MultipleSources: circuit defines " +
                              std::to_string(c.sources.size()) + " sources");
    const Source& src = c.sources.front();
    check_node_ref(c, "source", src.node);
    check_positive(src.kv_ll, "source", "kV");
    if (!(src.voltage_pu > 0.5 && src.voltage_pu < 1.5))
        throw ValidationError("InvalidComponent: source: voltage_pu " +
                              format_double(src.voltage_pu) + " outside (0.5, 1.5)");

    return c;
}

ValidationReport validate_topology(const Circuit& c) {
    ValidationReport report;
    RadialGraph g = build_radial_graph(c);

    for (int i = 0; i < int(c.nodes.size()); ++i)
        if (!g.reachable[size_t(i)]) report.unreachable.push_back(c.nodes[size_t(i)].id);

    report.cycles = g.cycles;

    auto delivered_at = [&](const std::string& node) -> std::optional<PhaseSet> {
        int i = c.node_index(node);
        if (i < 0 || !g.reachable[size_t(i)]) return std::nullopt;
        return g.delivered[size_t(i)];
    };

    // Branch phases must be available at the end nearer the source.
    auto check_branch = [&](const std::string& id, const std::string& from,
                            const std::string& to, PhaseSet phases) {
        int fi = c.node_index(from);
        int ti = c.node_index(to);
        if (fi < 0 || ti < 0) return;
        if (!g.reachable[size_t(fi)] || !g.reachable[size_t(ti)]) return;
        int upstream;
        if (g.parent[size_t(ti)] == fi) upstream = fi;
        else if (g.parent[size_t(fi)] == ti) upstream = ti;
        else return; // cycle-closing branch; direction undefined
        PhaseSet avail = g.delivered[size_t(upstream)];
        if (!phases.is_subset_of(avail))
            report.phase_violations.push_back(
                {id, "carries " + phases.to_string() + " but upstream node " +
                         c.nodes[size_t(upstream)].id + " delivers " + avail.to_string()});
    };

    for (const auto& l : c.lines) check_branch(l.id, l.from_node, l.to_node, l.phases);
    for (const auto& s : c.switches) check_branch(s.id, s.from_node, s.to_node, s.phases);
    for (const auto& t : c.transformers)
        check_branch(t.id, t.from_node, t.to_node, PhaseSet::abc());

    auto check_device = [&](const std::string& id, const std::string& node, PhaseSet phases) {
        auto avail = delivered_at(node);
        if (avail && !phases.is_subset_of(*avail))
            report.phase_violations.push_back(
                {id, "uses " + phases.to_string() + " but node " + node + " delivers " +
                         avail->to_string()});
    };

    for (const auto& b : c.capacitors) check_device(b.id, b.node, b.phases);
    for (const auto& l : c.loads) check_device(l.id, l.node, l.phases);
    for (const auto& gn : c.generators) check_device(gn.id, gn.node, gn.phases);

    for (const auto& l : c.lines) {
        bool zero = l.has_sequence()
                        ? (l.sequence().z1() == Complex(0, 0) && l.sequence().z0() == Complex(0, 0))
                        : l.matrix().z.isZero(0.0);
        if (zero) report.warnings.push_back({l.id, "zero series impedance"});
    }
    auto all_zero = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return a == std::array<double, 3>{} && b == std::array<double, 3>{};
    };
    for (const auto& l : c.loads)
        if (all_zero(l.kw_per_phase, l.kvar_per_phase))
            report.warnings.push_back({l.id, "load has zero power on every phase"});
    for (const auto& gn : c.generators)
        if (all_zero(gn.kw_per_phase, gn.kvar_per_phase))
            report.warnings.push_back({gn.id, "generator has zero power on every phase"});

    return report;
}

Summary circuit_summary(const Circuit& c) {
    Summary s;
    s.nodes = int(c.nodes.size());
    s.lines = int(c.lines.size());
    s.transformers = int(c.transformers.size());
    s.switches = int(c.switches.size());
    s.capacitors = int(c.capacitors.size());
    s.loads = int(c.loads.size());
    s.generators = int(c.generators.size());
    for (const auto& l : c.loads)
        for (Phase p : kAllPhases) {
            s.total_load_kw += l.kw_per_phase[size_t(p)];
            s.total_load_kvar += l.kvar_per_phase[size_t(p)];
        }
    for (const auto& b : c.capacitors) s.total_cap_kvar += b.total_kvar;
    for (const auto& g : c.generators)
        for (Phase p : kAllPhases) {
            s.total_gen_kw += g.kw_per_phase[size_t(p)];
            s.total_gen_kvar += g.kvar_per_phase[size_t(p)];
        }
    return s;
}

std::string summary_line(const Summary& s) {
    std::string out = "nodes=" + std::to_string(s.nodes) + " lines=" + std::to_string(s.lines) +
                      " transformers=" + std::to_string(s.transformers) +
                      " switches=" + std::to_string(s.switches) +
                      " capacitors=" + std::to_string(s.capacitors) +
                      " loads=" + std::to_string(s.loads) +
                      " generators=" + std::to_string(s.generators) +
                      " load_kw=" + format_double(s.total_load_kw) +
                      " load_kvar=" + format_double(s.total_load_kvar) +
                      " cap_kvar=" + format_double(s.total_cap_kvar);
    if (s.generators > 0)
        out += " gen_kw=" + format_double(s.total_gen_kw) +
               " gen_kvar=" + format_double(s.total_gen_kvar);
    return out;
}

std::string_view config_name(WindingConfig c) {
    switch (c) {
        case WindingConfig::D: return "D";
        case WindingConfig::Y: return "Y";
        default: return "Yg";
    }
}

WindingConfig parse_config(std::string_view text) {
    if (text == "D") return WindingConfig::D;
    if (text == "Y") return WindingConfig::Y;
    if (text == "Yg") return WindingConfig::Yg;
    throw ValidationError("invalid winding config \"" + std::string(text) + "\"");
}

}  // namespace gridhub
