#include "generators.hpp"

#include <algorithm>
#include <random>

#include "gridhub/numtext.hpp"
#include "gridhub/transforms.hpp"

namespace gridhub::testing {

namespace {

struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed) : eng(seed) {}

    double real(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool chance(double p) { return real(0, 1) < p; }

    /// Random value quantized to a short decimal (5 significant digits), so
    /// every serialization of it is exact.
    double quantized(double lo, double hi) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.5g", real(lo, hi));
        return *parse_double(buf);
    }

    template <typename T>
    T pick(std::initializer_list<T> items) {
        auto it = items.begin();
        std::advance(it, integer(0, int(items.size()) - 1));
        return *it;
    }
};

const std::initializer_list<double> kVoltageClasses = {0.208, 0.48, 4.16, 12.0,
                                                       12.47, 13.2, 24.94, 34.5};

PhaseSet random_phases(Rng& rng, PhaseSet within, bool allow_partial) {
    if (!allow_partial || rng.chance(0.7)) return within;
    int n = 0;
    auto members = within.members(n);
    if (n == 1) return within;
    int keep = rng.integer(1, n - 1);
    // drop random members down to `keep`
    std::vector<Phase> pool(members.begin(), members.begin() + n);
    std::shuffle(pool.begin(), pool.end(), rng.eng);
    PhaseSet out;
    for (int i = 0; i < keep; ++i) out.add(pool[size_t(i)]);
    return out;
}

std::array<double, 3> random_per_phase(Rng& rng, PhaseSet phases, double lo, double hi) {
    std::array<double, 3> out{};
    for (Phase p : kAllPhases)
        if (phases.has(p)) out[size_t(p)] = rng.quantized(lo, hi);
    return out;
}

WindingConfig random_config(Rng& rng, PhaseSet phases) {
    if (phases.count() >= 2 && rng.chance(0.25)) return WindingConfig::D;
    return rng.chance(0.5) ? WindingConfig::Yg : WindingConfig::Y;
}

SequenceImpedance random_sequence(Rng& rng, bool with_charging) {
    SequenceImpedance s;
    s.r1 = rng.quantized(0.002, 0.3);
    s.x1 = rng.quantized(0.003, 0.5);
    s.r0 = rng.quantized(0.005, 0.8);
    s.x0 = rng.quantized(0.005, 1.2);
    if (with_charging) {
        s.b1 = rng.quantized(0.5, 40.0);
        s.b0 = rng.chance(0.5) ? s.b1 : rng.quantized(0.1, 40.0);
    }
    return s;
}

}  // namespace

Circuit random_roundtrip_circuit(uint64_t seed, int max_nodes) {
    Rng rng(seed);
    Circuit c;

    int n = rng.integer(1, max_nodes);
    std::vector<double> level(static_cast<size_t>(n));
    std::vector<PhaseSet> delivered(static_cast<size_t>(n));
    level[0] = rng.pick(kVoltageClasses);
    delivered[0] = PhaseSet::abc();

    for (int i = 0; i < n; ++i) {
        std::string id;
        switch (i % 3) {
            case 0: id = "N" + std::to_string(i + 1); break;
            case 1: id = "BUS-" + std::to_string(i + 1); break;
            default: id = "nd" + std::to_string(i + 1) + "'"; break;
        }
        Node node{id, std::nullopt, std::nullopt};
        if (rng.chance(0.2))
            node.coord = {{rng.quantized(-100, 100), rng.quantized(-100, 100)}};
        c.nodes.push_back(std::move(node));
    }

    c.sources.push_back({c.nodes[0].id, level[0], rng.quantized(0.95, 1.05),
                         rng.pick({0.0, 30.0, -30.0, 120.0})});

    std::vector<LineSegment> cables, overheads;
    int branch_counter = 0;
    for (int i = 1; i < n; ++i) {
        int parent = rng.integer(0, i - 1);
        ++branch_counter;
        double roll = rng.real(0, 1);
        if (roll < 0.15 && level[size_t(parent)] > 1.0) {
            TransformerSpec t;
            t.id = "TX" + std::to_string(branch_counter);
            t.from_node = c.nodes[size_t(parent)].id;
            t.to_node = c.nodes[size_t(i)].id;
            t.prim_kv_ll = level[size_t(parent)];
            t.sec_kv_ll = rng.pick({0.208, 0.48, 4.16});
            while (t.sec_kv_ll == t.prim_kv_ll) t.sec_kv_ll = rng.pick({0.208, 0.48, 2.4});
            t.kva_rating = rng.pick({300.0, 500.0, 750.0, 1500.0, 2500.0});
            t.x1r1_ratio = rng.quantized(2, 20);
            t.x0r0_ratio = rng.quantized(2, 20);
            t.z1_pct = rng.quantized(1, 8);
            t.z0_pct = rng.quantized(1, 8);
            t.prim_config = rng.pick({WindingConfig::D, WindingConfig::Yg});
            t.sec_config = rng.pick({WindingConfig::Yg, WindingConfig::Y});
            level[size_t(i)] = t.sec_kv_ll;
            delivered[size_t(i)] = PhaseSet::abc();
            c.transformers.push_back(std::move(t));
        } else if (roll < 0.3) {
            Switch s;
            s.id = "SW" + std::to_string(branch_counter);
            s.from_node = c.nodes[size_t(parent)].id;
            s.to_node = c.nodes[size_t(i)].id;
            s.phases = delivered[size_t(parent)];
            s.status = SwitchStatus::Closed;
            level[size_t(i)] = level[size_t(parent)];
            delivered[size_t(i)] = s.phases;
            c.switches.push_back(std::move(s));
        } else {
            LineSegment l;
            l.kind = rng.chance(0.7) ? LineKind::Cable : LineKind::Overhead;
            l.id = (l.kind == LineKind::Cable ? "C" : "OH") + std::to_string(branch_counter);
            l.from_node = c.nodes[size_t(parent)].id;
            l.to_node = c.nodes[size_t(i)].id;
            l.phases = random_phases(rng, delivered[size_t(parent)], true);
            l.impedance = random_sequence(rng, rng.chance(0.6));
            l.length_ft = rng.quantized(50, 8000);
            l.ampacity = random_per_phase(rng, l.phases, 100, 700);
            level[size_t(i)] = level[size_t(parent)];
            delivered[size_t(i)] = l.phases;
            (l.kind == LineKind::Cable ? cables : overheads).push_back(std::move(l));
        }
    }
    // workbook sheet order: cables before overhead lines
    for (auto& l : cables) c.lines.push_back(std::move(l));
    for (auto& l : overheads) c.lines.push_back(std::move(l));

    for (int i = 0; i < n; ++i) {
        if (rng.chance(0.3)) c.nodes[size_t(i)].nominal_kv_ll = level[size_t(i)];

        if (rng.chance(0.5)) {
            SpotLoad l;
            l.id = "LD" + std::to_string(i + 1);
            l.node = c.nodes[size_t(i)].id;
            l.phases = random_phases(rng, delivered[size_t(i)], true);
            l.config = random_config(rng, l.phases);
            l.kw_per_phase = random_per_phase(rng, l.phases, 1, 900);
            l.kvar_per_phase = random_per_phase(rng, l.phases, 0, 500);
            c.loads.push_back(std::move(l));
        }
        if (rng.chance(0.2)) {
            Generator g;
            g.id = "GEN" + std::to_string(i + 1);
            g.node = c.nodes[size_t(i)].id;
            g.phases = random_phases(rng, delivered[size_t(i)], true);
            g.config = random_config(rng, g.phases);
            g.kw_per_phase = random_per_phase(rng, g.phases, 1, 400);
            g.kvar_per_phase = random_per_phase(rng, g.phases, 0, 200);
            if (rng.chance(0.5)) g.rated_kv = rng.quantized(0.2, 20);
            c.generators.push_back(std::move(g));
        }
        if (rng.chance(0.25)) {
            CapacitorBank b;
            b.id = "CB" + std::to_string(i + 1);
            b.node = c.nodes[size_t(i)].id;
            b.status = rng.chance(0.8) ? CapStatus::On : CapStatus::Off;
            b.phases = random_phases(rng, delivered[size_t(i)], true);
            b.config = random_config(rng, b.phases);
            b.rated_kv = rng.quantized(0.2, 20);
            b.total_kvar = rng.pick({150.0, 300.0, 600.0, 900.0, 1200.0});
            if (rng.chance(0.5)) {
                b.sense_on_v = rng.quantized(110, 124);
                b.sense_off_v = *b.sense_on_v + rng.quantized(1, 8);
                b.pt_ratio = rng.quantized(20, 100);
            }
            if (rng.chance(0.2))
                b.control_voltage_node = c.nodes[size_t(rng.integer(0, n - 1))].id;
            c.capacitors.push_back(std::move(b));
        }
    }

    return build_circuit(std::move(c));
}

Circuit random_solvable_circuit(uint64_t seed, int max_nodes) {
    Rng rng(seed);
    Circuit c;

    int n = rng.integer(2, max_nodes);
    std::vector<double> level(static_cast<size_t>(n));
    std::vector<PhaseSet> delivered(static_cast<size_t>(n));
    level[0] = rng.pick({12.0, 12.47, 13.2});
    delivered[0] = PhaseSet::abc();

    for (int i = 0; i < n; ++i)
        c.nodes.push_back({"N" + std::to_string(i + 1), std::nullopt, std::nullopt});
    c.sources.push_back({c.nodes[0].id, level[0], rng.quantized(0.98, 1.02),
                         rng.pick({0.0, -30.0})});

    for (int i = 1; i < n; ++i) {
        int parent = rng.integer(0, i - 1);
        double roll = rng.real(0, 1);
        if (roll < 0.15) {
            TransformerSpec t;
            t.id = "TX" + std::to_string(i);
            t.from_node = c.nodes[size_t(parent)].id;
            t.to_node = c.nodes[size_t(i)].id;
            t.prim_kv_ll = level[size_t(parent)];
            t.sec_kv_ll = 0.48;
            t.kva_rating = rng.pick({750.0, 1500.0});
            t.x1r1_ratio = rng.quantized(4, 12);
            t.x0r0_ratio = rng.quantized(4, 12);
            t.z1_pct = rng.quantized(4, 7);
            t.z0_pct = rng.quantized(4, 7);
            t.prim_config = rng.pick({WindingConfig::D, WindingConfig::Yg});
            t.sec_config = WindingConfig::Yg;
            level[size_t(i)] = t.sec_kv_ll;
            delivered[size_t(i)] = PhaseSet::abc();
            c.transformers.push_back(std::move(t));
        } else if (roll < 0.25) {
            Switch s;
            s.id = "SW" + std::to_string(i);
            s.from_node = c.nodes[size_t(parent)].id;
            s.to_node = c.nodes[size_t(i)].id;
            s.phases = delivered[size_t(parent)];
            s.status = SwitchStatus::Closed;
            level[size_t(i)] = level[size_t(parent)];
            delivered[size_t(i)] = s.phases;
            c.switches.push_back(std::move(s));
        } else {
            LineSegment l;
            l.kind = rng.chance(0.7) ? LineKind::Cable : LineKind::Overhead;
            l.id = "L" + std::to_string(i);
            l.from_node = c.nodes[size_t(parent)].id;
            l.to_node = c.nodes[size_t(i)].id;
            l.phases = random_phases(rng, delivered[size_t(parent)], true);
            SequenceImpedance s = random_sequence(rng, rng.chance(0.6));
            if (rng.chance(0.3)) {
                // coupled matrix form, mildly perturbed off the circulant
                // pattern so the full 3x3 path gets exercised
                PhaseImpedanceMatrix m = sequence_to_phase(s, l.phases);
                for (Phase p : kAllPhases)
                    for (Phase q : kAllPhases) {
                        if (!l.phases.has(p) || !l.phases.has(q) || int(p) > int(q)) continue;
                        Complex jitter(rng.real(-0.002, 0.002), rng.real(-0.002, 0.002));
                        m.z(int(p), int(q)) += jitter;
                        if (p != q) m.z(int(q), int(p)) = m.z(int(p), int(q));
                    }
                l.impedance = m;
            } else {
                l.impedance = s;
            }
            l.length_ft = rng.quantized(100, 4000);
            l.ampacity = random_per_phase(rng, l.phases, 200, 600);
            level[size_t(i)] = level[size_t(parent)];
            delivered[size_t(i)] = l.phases;
            c.lines.push_back(std::move(l));
        }
    }

    for (int i = 1; i < n; ++i) {
        if (rng.chance(0.75)) {
            SpotLoad l;
            l.id = "LD" + std::to_string(i);
            l.node = c.nodes[size_t(i)].id;
            l.phases = random_phases(rng, delivered[size_t(i)], true);
            l.config = random_config(rng, l.phases);
            double scale = level[size_t(i)] < 1.0 ? 60.0 : 600.0;
            l.kw_per_phase = random_per_phase(rng, l.phases, scale * 0.1, scale);
            l.kvar_per_phase = random_per_phase(rng, l.phases, 0, scale * 0.5);
            c.loads.push_back(std::move(l));
        }
        if (rng.chance(0.25)) {
            Generator g;
            g.id = "G" + std::to_string(i);
            g.node = c.nodes[size_t(i)].id;
            g.phases = delivered[size_t(i)];
            g.config = WindingConfig::Yg;
            double scale = level[size_t(i)] < 1.0 ? 30.0 : 300.0;
            g.kw_per_phase = random_per_phase(rng, g.phases, 0, scale);
            g.kvar_per_phase = random_per_phase(rng, g.phases, 0, scale * 0.3);
            c.generators.push_back(std::move(g));
        }
        if (rng.chance(0.3)) {
            CapacitorBank b;
            b.id = "CB" + std::to_string(i);
            b.node = c.nodes[size_t(i)].id;
            b.phases = random_phases(rng, delivered[size_t(i)], true);
            b.config = rng.chance(0.3) && b.phases.count() >= 2 ? WindingConfig::D
                                                                : WindingConfig::Yg;
            b.rated_kv = b.config == WindingConfig::D
                             ? level[size_t(i)]
                             : rng.quantized(0.9, 1.1) * level[size_t(i)] / kSqrt3;
            b.total_kvar = rng.pick({75.0, 150.0, 300.0, 600.0});
            c.capacitors.push_back(std::move(b));
        }
    }

    return build_circuit(std::move(c));
}

}  // namespace gridhub::testing
