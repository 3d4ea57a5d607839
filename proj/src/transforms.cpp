#include "gridhub/transforms.hpp"

#include <cmath>
#include <map>

#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "radial_graph.hpp"

namespace gridhub {

namespace {

Mat3c circulant_from(Complex self, Complex mutual, PhaseSet phases) {
    Mat3c m = Mat3c::Zero();
    for (Phase i : kAllPhases) {
        if (!phases.has(i)) continue;
        for (Phase j : kAllPhases) {
            if (!phases.has(j)) continue;
            m(int(i), int(j)) = (i == j) ? self : mutual;
        }
    }
    return m;
}

PhaseSet matrix_phases(const Mat3c& z, const Mat3c& b) {
    PhaseSet s;
    for (Phase p : kAllPhases)
        if (z(int(p), int(p)) != Complex(0, 0) || b(int(p), int(p)) != Complex(0, 0))
            s.add(p);
    return s;
}

// Mean diagonal and mean off-diagonal over present phases, with the
// circulant-symmetry deviation check.
void split_circulant(const Mat3c& m, PhaseSet phases, Complex& self, Complex& mutual) {
    int n = 0;
    auto members = phases.members(n);
    Complex diag_sum = 0, off_sum = 0;
    int off_count = 0;
    for (int a = 0; a < n; ++a) {
        diag_sum += m(int(members[a]), int(members[a]));
        for (int b = a + 1; b < n; ++b) {
            off_sum += m(int(members[a]), int(members[b]));
            ++off_count;
        }
    }
    self = diag_sum / double(n);
    mutual = off_count ? off_sum / double(off_count) : Complex(0, 0);

    double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-30);
    double worst = 0;
    for (int a = 0; a < n; ++a) {
        worst = std::max(worst, std::abs(m(int(members[a]), int(members[a])) - self));
        for (int b = a + 1; b < n; ++b)
            worst = std::max(worst, std::abs(m(int(members[a]), int(members[b])) - mutual));
    }
    if (worst > 1e-6 * scale)
        throw ValidationError("NotBalanced: matrix is not circulant-symmetric, max deviation " +
                              format_double(worst / scale) + " relative");
}

}  // namespace

PhaseImpedanceMatrix sequence_to_phase(const SequenceImpedance& s, PhaseSet phases) {
    Complex zs = (s.z0() + 2.0 * s.z1()) / 3.0;
    Complex zm = (s.z0() - s.z1()) / 3.0;
    Complex bs = Complex(s.b0 + 2.0 * s.b1, 0) / 3.0;
    Complex bm = Complex(s.b0 - s.b1, 0) / 3.0;
    PhaseImpedanceMatrix out;
    out.z = circulant_from(zs, zm, phases);
    out.b_shunt = circulant_from(bs, bm, phases);
    return out;
}

SequenceImpedance phase_to_sequence(const PhaseImpedanceMatrix& m) {
    PhaseSet phases = matrix_phases(m.z, m.b_shunt);
    if (phases.empty()) return {};

    Complex zs, zm, bs, bm;
    split_circulant(m.z, phases, zs, zm);
    split_circulant(m.b_shunt, phases, bs, bm);

    Complex z1 = zs - zm;
    Complex z0 = zs + 2.0 * zm;
    Complex b1 = bs - bm;
    Complex b0 = bs + 2.0 * bm;
    double bscale = std::max(std::abs(b1), std::abs(b0));
    if (std::max(std::abs(b1.imag()), std::abs(b0.imag())) > 1e-6 * std::max(bscale, 1e-30))
        throw ValidationError("NotBalanced: shunt matrix has a non-susceptance component");

    SequenceImpedance out;
    out.r1 = z1.real();
    out.x1 = z1.imag();
    out.b1 = b1.real();
    out.r0 = z0.real();
    out.x0 = z0.imag();
    out.b0 = b0.real();
    return out;
}

double segment_charging_b1_us(const LineSegment& l) {
    if (l.has_sequence()) return l.sequence().b1;
    const Mat3c& b = l.matrix().b_shunt;
    PhaseSet phases = l.phases;
    int n = 0;
    auto members = phases.members(n);
    if (n == 0) return 0;
    Complex self = 0, mutual = 0;
    int off = 0;
    for (int a = 0; a < n; ++a) {
        self += b(int(members[a]), int(members[a]));
        for (int k = a + 1; k < n; ++k) {
            mutual += b(int(members[a]), int(members[k]));
            ++off;
        }
    }
    self /= double(n);
    if (off) mutual /= double(off);
    return (self - mutual).real();
}

Circuit propagate_nominal_voltages(Circuit c) {
    RadialGraph g = build_radial_graph(c);

    std::vector<double> assigned(c.nodes.size(), 0);
    std::vector<char> set(c.nodes.size(), 0);

    auto agree = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(a, b); };

    auto place = [&](int idx, double kv) {
        const Node& node = c.nodes[size_t(idx)];
        if (node.nominal_kv_ll && !agree(*node.nominal_kv_ll, kv))
            throw ValidationError("VoltageConflict: node " + node.id + ": explicit " +
                                  format_double(*node.nominal_kv_ll) + " kV vs propagated " +
                                  format_double(kv) + " kV");
        if (set[size_t(idx)]) {
            if (!agree(assigned[size_t(idx)], kv))
                throw ValidationError("VoltageConflict: node " + node.id + ": " +
                                      format_double(assigned[size_t(idx)]) + " kV vs " +
                                      format_double(kv) + " kV on another path");
            return;
        }
        set[size_t(idx)] = 1;
        assigned[size_t(idx)] = node.nominal_kv_ll ? *node.nominal_kv_ll : kv;
    };

    auto across = [&](BranchRef b, int from_idx, double kv) {
        if (b.kind != BranchRef::Transformer) return kv;
        const TransformerSpec& t = c.transformers[size_t(b.index)];
        bool forward = c.node_index(t.from_node) == from_idx;
        return forward ? t.sec_kv_ll : t.prim_kv_ll;
    };

    if (g.source >= 0) place(g.source, c.source().kv_ll);
    for (int idx : g.order) {
        if (idx == g.source) continue;
        int up = g.parent[size_t(idx)];
        place(idx, across(g.parent_branch[size_t(idx)], up, assigned[size_t(up)]));
    }

    // Cycle-closing branches must agree with what the tree assigned.
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        if (!g.reachable[i]) continue;
        for (auto& [peer, b] : g.adj[i]) {
            if (!g.reachable[size_t(peer)]) continue;
            place(peer, across(b, int(i), assigned[i]));
        }
    }

    for (size_t i = 0; i < c.nodes.size(); ++i) {
        if (set[i]) {
            c.nodes[i].nominal_kv_ll = assigned[i];
        } else if (!c.nodes[i].nominal_kv_ll) {
            throw ValidationError("Unreachable: node " + c.nodes[i].id +
                                  " has no path from the source and no explicit voltage");
        }
    }
    return build_circuit(std::move(c));
}

Circuit lower_line_charging(Circuit c) {
    std::vector<CapacitorBank> added;

    auto nominal_kv = [&](const std::string& node_id) {
        const Node& n = c.node_at(node_id);
        if (!n.nominal_kv_ll)
            throw ValidationError("MissingNominalVoltage: node " + node_id +
                                  " (run voltage propagation first)");
        return *n.nominal_kv_ll;
    };

    for (auto& l : c.lines) {
        double b1_us = segment_charging_b1_us(l);

        // Zero-sequence charging has no solver participation; the pass
        // drops it along with b1 so lowered segments carry no shunt at all.
        if (l.has_sequence()) {
            auto& s = std::get<SequenceImpedance>(l.impedance);
            s.b1 = 0;
            s.b0 = 0;
        } else {
            std::get<PhaseImpedanceMatrix>(l.impedance).b_shunt.setZero();
        }
        if (b1_us == 0) continue;
        double b_total = b1_us * 1e-6; // siemens

        auto make_bank = [&](const std::string& suffix, const std::string& node) {
            double v_ln = kv_ll_to_v_ln(nominal_kv(node));
            double q_phase_var = v_ln * v_ln * (b_total / 2.0);
            CapacitorBank bank;
            bank.id = l.id + suffix;
            bank.node = node;
            bank.status = CapStatus::On;
            bank.rated_kv = nominal_kv(node) / kSqrt3; // line-to-neutral, Y convention
            bank.total_kvar = l.phases.count() * q_phase_var / 1000.0;
            bank.phases = l.phases;
            bank.config = WindingConfig::Yg;
            bank.synthetic = true;
            added.push_back(std::move(bank));
        };
        make_bank("__chg_from", l.from_node);
        make_bank("__chg_to", l.to_node);
    }

    for (auto& bank : added) c.capacitors.push_back(std::move(bank));
    return build_circuit(std::move(c));
}

Circuit fold_charging_capacitors(Circuit c) {
    std::map<std::string, double> restored_b1_us; // line id -> total b1
    std::vector<CapacitorBank> kept;

    // Folding keys on the reserved "__chg_from"/"__chg_to" id convention
    // rather than the synthetic flag, which the workbook schema cannot
    // carry; the pass then survives a hop through the hub format.
    for (auto& bank : c.capacitors) {
        std::string line_id;
        for (const char* suffix : {"__chg_from", "__chg_to"}) {
            size_t len = std::string(suffix).size();
            if (bank.id.size() > len &&
                bank.id.compare(bank.id.size() - len, len, suffix) == 0)
                line_id = bank.id.substr(0, bank.id.size() - len);
        }
        bool folded = false;
        if (!line_id.empty()) {
            for (auto& l : c.lines) {
                if (l.id != line_id) continue;
                double v_ln = bank.rated_kv * 1000.0;
                double q_phase_var = bank.total_kvar * 1000.0 / bank.phases.count();
                restored_b1_us[line_id] += q_phase_var / (v_ln * v_ln) * 1e6;
                folded = true;
                break;
            }
        }
        if (!folded) kept.push_back(std::move(bank));
    }

    // The synthetic banks were plain per-phase-to-ground susceptances, which
    // in sequence terms is b0 == b1; the original zero-sequence charging is
    // gone and cannot come back distinct.
    for (auto& l : c.lines) {
        auto it = restored_b1_us.find(l.id);
        if (it == restored_b1_us.end()) continue;
        if (l.has_sequence()) {
            auto& s = std::get<SequenceImpedance>(l.impedance);
            s.b1 = it->second;
            s.b0 = it->second;
        } else {
            auto& m = std::get<PhaseImpedanceMatrix>(l.impedance);
            for (Phase p : kAllPhases)
                if (l.phases.has(p)) m.b_shunt(int(p), int(p)) = Complex(it->second, 0);
        }
    }

    c.capacitors = std::move(kept);
    return build_circuit(std::move(c));
}

TransformerImpedance transformer_impedance(const TransformerSpec& t) {
    TransformerImpedance out;
    out.r1_pu = (t.z1_pct / 100.0) / std::sqrt(1.0 + t.x1r1_ratio * t.x1r1_ratio);
    out.x1_pu = t.x1r1_ratio * out.r1_pu;
    out.r0_pu = (t.z0_pct / 100.0) / std::sqrt(1.0 + t.x0r0_ratio * t.x0r0_ratio);
    out.x0_pu = t.x0r0_ratio * out.r0_pu;
    return out;
}

Circuit lower_for_target(Circuit c, const LoweringOptions& opts) {
    if (opts.target_needs_node_voltages || opts.target_lacks_line_charging)
        c = propagate_nominal_voltages(std::move(c));
    if (opts.target_lacks_line_charging) c = lower_line_charging(std::move(c));
    if (opts.target_needs_abc) {
        for (auto& l : c.lines)
            if (l.has_sequence()) l.impedance = sequence_to_phase(l.sequence(), l.phases);
        c = build_circuit(std::move(c));
    }
    return c;
}

}  // namespace gridhub
