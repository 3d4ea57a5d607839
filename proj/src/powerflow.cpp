#include "gridhub/powerflow.hpp"

#include <cmath>

#include "gridhub/errors.hpp"
#include "gridhub/numtext.hpp"
#include "gridhub/transforms.hpp"
#include "radial_graph.hpp"

namespace gridhub {

namespace {

const Complex kJ(0, 1);

Vec3c phase_rotation(double angle_deg) {
    double a = angle_deg * M_PI / 180.0;
    return {std::polar(1.0, a), std::polar(1.0, a - 2.0 * M_PI / 3.0),
            std::polar(1.0, a + 2.0 * M_PI / 3.0)};
}

// V_down = gain*V_up - z*I_down ; I_up = conj(gain)*I_down
struct SeriesBranch {
    BranchRef ref;
    int up = -1, down = -1;
    Complex gain{1, 0};
    Mat3c z = Mat3c::Zero();
    Complex y_sh = 0;   // per-phase charging admittance at each end (S)
    PhaseSet carried;   // phases with current on this branch
};

struct Shunt {
    int node = -1;
    PhaseSet phases;
    bool delta = false;
    bool admittance = false;          // capacitors
    std::array<Complex, 3> s_va{};    // wye: per phase; delta: per pair (keyed by first phase)
    std::array<Complex, 3> y{};       // same keying for admittance devices
};

std::vector<std::pair<int, int>> delta_pairs(PhaseSet ph) {
    int n = 0;
    auto m = ph.members(n);
    if (n == 3) return {{0, 1}, {1, 2}, {2, 0}};
    if (n == 2) return {{int(m[0]), int(m[1])}};
    return {};
}

/// Per-phase current drawn by the device at voltage V (into the device).
Vec3c shunt_current(const Shunt& sh, const Vec3c& v) {
    Vec3c i = Vec3c::Zero();
    if (!sh.delta) {
        for (Phase p : kAllPhases) {
            size_t k = size_t(p);
            if (!sh.phases.has(p)) continue;
            if (sh.admittance) {
                i[long(k)] += sh.y[k] * v[long(k)];
            } else if (sh.s_va[k] != Complex(0, 0)) {
                i[long(k)] += std::conj(sh.s_va[k] / v[long(k)]);
            }
        }
        return i;
    }
    for (auto [a, b] : delta_pairs(sh.phases)) {
        Complex v_ab = v[a] - v[b];
        Complex i_ab;
        if (sh.admittance) {
            i_ab = sh.y[size_t(a)] * v_ab;
        } else if (sh.s_va[size_t(a)] != Complex(0, 0)) {
            i_ab = std::conj(sh.s_va[size_t(a)] / v_ab);
        } else {
            continue;
        }
        i[a] += i_ab;
        i[b] -= i_ab;
    }
    return i;
}

/// Power consumed by the device at voltage V.
Complex shunt_power(const Shunt& sh, const Vec3c& v) {
    Vec3c i = shunt_current(sh, v);
    Complex s = 0;
    for (Phase p : kAllPhases)
        if (sh.phases.has(p)) s += v[int(p)] * std::conj(i[int(p)]);
    return s;
}

struct Network {
    RadialGraph graph;
    std::vector<double> v_nom_ln;              // per node index
    std::vector<SeriesBranch> branches;        // parent branch of order[k], k>=1
    std::vector<std::vector<int>> child_branch; // node index -> branch positions
    std::vector<Shunt> shunts;
    std::vector<std::vector<int>> node_shunts; // node index -> shunt positions
};

Complex transformer_ratio(const TransformerSpec& t) {
    double n = t.prim_kv_ll / t.sec_kv_ll;
    bool prim_d = t.prim_config == WindingConfig::D;
    bool sec_d = t.sec_config == WindingConfig::D;
    if (prim_d == sec_d) return {n, 0};
    // one delta winding: the low-voltage side lags the high side by 30 degrees
    double theta = (t.sec_kv_ll < t.prim_kv_ll) ? M_PI / 6.0 : -M_PI / 6.0;
    return std::polar(n, theta);
}

Shunt make_capacitor_shunt(const Circuit& c, const CapacitorBank& b) {
    Shunt sh;
    sh.node = c.node_index(b.node);
    sh.phases = b.phases;
    sh.admittance = true;
    sh.delta = b.config == WindingConfig::D;
    double v_rated = b.rated_kv * 1000.0; // LN for wye banks, LL for delta banks
    if (sh.delta) {
        auto pairs = delta_pairs(b.phases);
        double q_pair = b.total_kvar * 1000.0 / double(pairs.size());
        for (auto [a, bph] : pairs) sh.y[size_t(a)] = kJ * (q_pair / (v_rated * v_rated));
    } else {
        double q_phase = b.total_kvar * 1000.0 / b.phases.count();
        for (Phase p : kAllPhases)
            if (b.phases.has(p)) sh.y[size_t(p)] = kJ * (q_phase / (v_rated * v_rated));
    }
    return sh;
}

template <typename Device>
Shunt make_power_shunt(const Circuit& c, const Device& d, double sign) {
    Shunt sh;
    sh.node = c.node_index(d.node);
    sh.phases = d.phases;
    sh.delta = d.config == WindingConfig::D;
    if (sh.delta) {
        auto pairs = delta_pairs(d.phases);
        if (pairs.size() == 1) {
            Complex total = 0;
            for (Phase p : kAllPhases)
                total += Complex(d.kw_per_phase[size_t(p)], d.kvar_per_phase[size_t(p)]);
            sh.s_va[size_t(pairs[0].first)] = sign * 1000.0 * total;
        } else {
            for (Phase p : kAllPhases)
                sh.s_va[size_t(p)] = sign * 1000.0 * Complex(d.kw_per_phase[size_t(p)],
                                                             d.kvar_per_phase[size_t(p)]);
        }
    } else {
        for (Phase p : kAllPhases)
            sh.s_va[size_t(p)] = sign * 1000.0 * Complex(d.kw_per_phase[size_t(p)],
                                                         d.kvar_per_phase[size_t(p)]);
    }
    return sh;
}

Network build_network(const Circuit& c) {
    Network net;
    net.graph = build_radial_graph(c);
    RadialGraph& g = net.graph;

    if (!g.cycles.empty()) {
        std::string ids;
        for (const auto& id : g.cycles.front()) ids += (ids.empty() ? "" : ", ") + id;
        throw ValidationError("NotRadial: cycle through branches [" + ids + "]");
    }

    net.v_nom_ln.assign(c.nodes.size(), 0);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        if (!g.reachable[i]) continue;
        if (!c.nodes[i].nominal_kv_ll)
            throw ValidationError("MissingVoltage: node " + c.nodes[i].id +
                                  " has no nominal voltage (run voltage propagation first)");
        net.v_nom_ln[i] = kv_ll_to_v_ln(*c.nodes[i].nominal_kv_ll);
    }

    net.child_branch.resize(c.nodes.size());
    for (size_t k = 1; k < g.order.size(); ++k) {
        int down = g.order[k];
        int up = g.parent[size_t(down)];
        BranchRef ref = g.parent_branch[size_t(down)];

        SeriesBranch sb;
        sb.ref = ref;
        sb.up = up;
        sb.down = down;
        sb.carried = g.delivered[size_t(down)];

        if (ref.kind == BranchRef::Line) {
            const LineSegment& l = c.lines[size_t(ref.index)];
            sb.z = l.has_sequence() ? sequence_to_phase(l.sequence(), l.phases).z : l.matrix().z;
            sb.y_sh = kJ * (segment_charging_b1_us(l) * 1e-6 / 2.0);
        } else if (ref.kind == BranchRef::Transformer) {
            const TransformerSpec& t = c.transformers[size_t(ref.index)];
            TransformerImpedance zi = transformer_impedance(t);
            double z_base_sec = t.sec_kv_ll * t.sec_kv_ll * 1000.0 / t.kva_rating;
            Complex z_sec = Complex(zi.r1_pu, zi.x1_pu) * z_base_sec;
            Complex ratio = transformer_ratio(t);
            bool forward = c.node_index(t.from_node) == up;
            if (forward) {
                sb.gain = 1.0 / ratio;
                sb.z = z_sec * Mat3c::Identity();
            } else {
                sb.gain = ratio;
                sb.z = std::norm(ratio) * z_sec * Mat3c::Identity();
            }
        }
        net.branches.push_back(sb);
        net.child_branch[size_t(up)].push_back(int(net.branches.size()) - 1);
    }

    net.node_shunts.resize(c.nodes.size());
    auto add_shunt = [&](Shunt sh) {
        if (sh.node < 0 || !g.reachable[size_t(sh.node)]) return;
        net.shunts.push_back(sh);
        net.node_shunts[size_t(sh.node)].push_back(int(net.shunts.size()) - 1);
    };
    for (const auto& l : c.loads) add_shunt(make_power_shunt(c, l, +1.0));
    for (const auto& gn : c.generators) add_shunt(make_power_shunt(c, gn, -1.0));
    for (const auto& b : c.capacitors)
        if (b.status == CapStatus::On) add_shunt(make_capacitor_shunt(c, b));

    return net;
}

}  // namespace

const PowerFlowSolution::NodeVoltage* PowerFlowSolution::find_voltage(
    std::string_view id) const {
    for (const auto& nv : node_voltages)
        if (nv.id == id) return &nv;
    return nullptr;
}

const PowerFlowSolution::BusPower* PowerFlowSolution::find_bus(std::string_view id) const {
    for (const auto& bp : bus_through)
        if (bp.id == id) return &bp;
    return nullptr;
}

PowerFlowSolution solve(const Circuit& c, const SolveOptions& o) {
    if (!(o.tol_pu > 0)) throw ValidationError("SolveOptions.tol_pu must be > 0");
    if (o.max_iter < 1) throw ValidationError("SolveOptions.max_iter must be >= 1");

    Network net = build_network(c);
    RadialGraph& g = net.graph;
    const Source& src = c.source();
    int src_idx = g.source;

    Vec3c rot = phase_rotation(src.angle_deg);
    Vec3c v_src = (src.voltage_pu * net.v_nom_ln[size_t(src_idx)]) * rot;

    std::vector<Vec3c> v(c.nodes.size(), Vec3c::Zero());
    // Flat start: nominal magnitude at the source angle everywhere. The
    // non-flat profile additionally applies accumulated transformer phase
    // shifts, a closer guess across D-wye units.
    std::vector<Complex> start_gain(c.nodes.size(), Complex(1, 0));
    for (size_t k = 1; k < g.order.size(); ++k) {
        const SeriesBranch& sb = net.branches[k - 1];
        start_gain[size_t(sb.down)] =
            start_gain[size_t(sb.up)] * (o.flat_start ? Complex(1, 0) : sb.gain / std::abs(sb.gain));
    }
    for (int idx : g.order) {
        for (Phase p : kAllPhases)
            if (g.delivered[size_t(idx)].has(p))
                v[size_t(idx)][int(p)] =
                    net.v_nom_ln[size_t(idx)] * rot[int(p)] * start_gain[size_t(idx)];
    }
    for (Phase p : kAllPhases) v[size_t(src_idx)][int(p)] = v_src[int(p)];

    std::vector<Vec3c> i_sub(c.nodes.size(), Vec3c::Zero());
    std::vector<Vec3c> i_series(net.branches.size(), Vec3c::Zero());

    auto backward = [&] {
        for (size_t k = g.order.size(); k-- > 0;) {
            int idx = g.order[k];
            Vec3c acc = Vec3c::Zero();
            for (int si : net.node_shunts[size_t(idx)])
                acc += shunt_current(net.shunts[size_t(si)], v[size_t(idx)]);
            for (int bi : net.child_branch[size_t(idx)]) {
                const SeriesBranch& sb = net.branches[size_t(bi)];
                Vec3c is = i_sub[size_t(sb.down)];
                for (Phase p : kAllPhases)
                    if (sb.carried.has(p)) {
                        is[int(p)] += sb.y_sh * v[size_t(sb.down)][int(p)];
                        acc[int(p)] += sb.y_sh * v[size_t(idx)][int(p)];
                    }
                i_series[size_t(bi)] = is;
                acc += std::conj(sb.gain) * is;
            }
            i_sub[size_t(idx)] = acc;
        }
    };

    auto forward = [&]() -> double {
        double mismatch = 0;
        for (size_t k = 0; k < g.order.size(); ++k) {
            int idx = g.order[k];
            Vec3c v_new;
            if (idx == src_idx) {
                v_new = v_src;
            } else {
                const SeriesBranch& sb = net.branches[k - 1];
                v_new = sb.gain * v[size_t(sb.up)] - sb.z * i_series[k - 1];
            }
            for (Phase p : kAllPhases) {
                if (!g.delivered[size_t(idx)].has(p)) {
                    v_new[int(p)] = 0;
                    continue;
                }
                double dv = std::abs(v_new[int(p)] - v[size_t(idx)][int(p)]) /
                            net.v_nom_ln[size_t(idx)];
                mismatch = std::max(mismatch, dv);
            }
            v[size_t(idx)] = v_new;
        }
        return mismatch;
    };

    PowerFlowSolution sol;
    sol.tol_pu = o.tol_pu;
    double mismatch = 0;
    for (int it = 1; it <= o.max_iter; ++it) {
        backward();
        mismatch = forward();
        sol.iterations = it;
        if (mismatch <= o.tol_pu) {
            sol.converged = true;
            break;
        }
    }
    sol.max_mismatch_pu = mismatch;

    // Through-power is metered at the series point of the upstream branch,
    // so a bus owns its full shunt set (including any charging attached at
    // its end of the feeding branch). This keeps the per-bus table
    // identical between pi-form and lowered (charging-as-capacitor) models.
    std::vector<int> feeding_branch(c.nodes.size(), -1);
    for (size_t k = 1; k < g.order.size(); ++k)
        feeding_branch[size_t(g.order[k])] = int(k) - 1;

    for (size_t idx = 0; idx < c.nodes.size(); ++idx) {
        if (!g.reachable[idx]) continue;
        PowerFlowSolution::NodeVoltage nv;
        nv.id = c.nodes[idx].id;
        nv.phases = g.delivered[idx];
        nv.v = v[idx];
        sol.node_voltages.push_back(std::move(nv));

        int fb = feeding_branch[idx];
        Complex s = 0;
        for (Phase p : kAllPhases) {
            if (!g.delivered[idx].has(p)) continue;
            Complex i = fb < 0 ? i_sub[idx][int(p)] : i_series[size_t(fb)][int(p)];
            s += v[idx][int(p)] * std::conj(i);
        }
        sol.bus_through.push_back({c.nodes[idx].id, s.real() / 1000.0, s.imag() / 1000.0});
    }

    for (size_t bi = 0; bi < net.branches.size(); ++bi) {
        const SeriesBranch& sb = net.branches[bi];
        Complex send = 0, recv = 0;
        for (Phase p : kAllPhases) {
            if (!sb.carried.has(p)) continue;
            Complex i_up = std::conj(sb.gain) * i_series[bi][int(p)] +
                           sb.y_sh * v[size_t(sb.up)][int(p)];
            send += v[size_t(sb.up)][int(p)] * std::conj(i_up);
            recv += v[size_t(sb.down)][int(p)] * std::conj(i_series[bi][int(p)]);
        }
        sol.branch_flows.push_back({branch_id(c, sb.ref), send.real() / 1000.0,
                                    send.imag() / 1000.0, recv.real() / 1000.0,
                                    recv.imag() / 1000.0});
    }

    return sol;
}

PowerResidual power_balance_residual(const Circuit& c, const PowerFlowSolution& s) {
    Network net = build_network(c);
    RadialGraph& g = net.graph;

    std::vector<Vec3c> v(c.nodes.size(), Vec3c::Zero());
    for (int idx : g.order) {
        const auto* nv = s.find_voltage(c.nodes[size_t(idx)].id);
        if (!nv)
            throw ValidationError("solution has no voltage for node " + c.nodes[size_t(idx)].id);
        v[size_t(idx)] = nv->v;
    }

    const auto* head = s.find_bus(c.source().node);
    if (!head) throw ValidationError("solution has no entry for the source bus");
    Complex injection(head->kw * 1000.0, head->kvar * 1000.0);

    // Constant-PQ devices consume their specification exactly, whatever the
    // voltage; everything voltage-dependent is re-evaluated at the solved
    // voltages.
    Complex spec_loads = 0;
    for (const auto& l : c.loads) {
        if (!g.reachable[size_t(c.node_index(l.node))]) continue;
        for (Phase p : kAllPhases)
            spec_loads += 1000.0 * Complex(l.kw_per_phase[size_t(p)], l.kvar_per_phase[size_t(p)]);
    }
    for (const auto& gn : c.generators) {
        if (!g.reachable[size_t(c.node_index(gn.node))]) continue;
        for (Phase p : kAllPhases)
            spec_loads -= 1000.0 * Complex(gn.kw_per_phase[size_t(p)],
                                           gn.kvar_per_phase[size_t(p)]);
    }

    Complex shunt_exchange = 0;
    for (const auto& sh : net.shunts) {
        if (!sh.admittance) continue; // capacitors only; PQ devices counted above
        shunt_exchange += shunt_power(sh, v[size_t(sh.node)]);
    }
    for (const auto& sb : net.branches) {
        if (sb.y_sh == Complex(0, 0)) continue;
        for (Phase p : kAllPhases) {
            if (!sb.carried.has(p)) continue;
            for (int end : {sb.up, sb.down}) {
                Complex ve = v[size_t(end)][int(p)];
                shunt_exchange += ve * std::conj(sb.y_sh * ve);
            }
        }
    }

    Complex losses = 0;
    for (const auto& bf : s.branch_flows)
        losses += Complex((bf.send_kw - bf.recv_kw) * 1000.0,
                          (bf.send_kvar - bf.recv_kvar) * 1000.0);
    // Branch send covers the charging drawn at the sending end (the
    // receiving end's share is inside the downstream bus). That charging
    // was also added to shunt_exchange, so take it back out of the losses.
    for (const auto& sb : net.branches) {
        if (sb.y_sh == Complex(0, 0)) continue;
        for (Phase p : kAllPhases) {
            if (!sb.carried.has(p)) continue;
            Complex vu = v[size_t(sb.up)][int(p)];
            losses -= vu * std::conj(sb.y_sh * vu);
        }
    }

    Complex residual = injection - spec_loads - losses - shunt_exchange;
    return {residual.real() / 1000.0, residual.imag() / 1000.0};
}

}  // namespace gridhub
