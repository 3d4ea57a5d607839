#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gridhub/circuit.hpp"
#include "gridhub/errors.hpp"

using namespace gridhub;

namespace {

Circuit chain_circuit(int n_nodes) {
    Circuit c;
    for (int i = 1; i <= n_nodes; ++i)
        c.nodes.push_back({"N" + std::to_string(i), std::nullopt, std::nullopt});
    for (int i = 1; i < n_nodes; ++i) {
        LineSegment l;
        l.id = "L" + std::to_string(i);
        l.from_node = "N" + std::to_string(i);
        l.to_node = "N" + std::to_string(i + 1);
        l.phases = PhaseSet::abc();
        l.impedance = SequenceImpedance{0.01, 0.012, 0, 0.054, 0.015, 0};
        l.ampacity = {400, 400, 400};
        c.lines.push_back(std::move(l));
    }
    c.sources.push_back({"N1", 12.0, 1.0, 0.0});
    return c;
}

SpotLoad abc_load(const std::string& id, const std::string& node, double kw, double kvar) {
    SpotLoad l;
    l.id = id;
    l.node = node;
    l.phases = PhaseSet::abc();
    l.config = WindingConfig::Yg;
    l.kw_per_phase = {kw / 3, kw / 3, kw / 3};
    l.kvar_per_phase = {kvar / 3, kvar / 3, kvar / 3};
    return l;
}

}  // namespace

TEST_CASE("PhaseSet parses canonical tokens only") {
    CHECK(PhaseSet::parse("ABC") == PhaseSet::abc());
    CHECK(PhaseSet::parse("AB").to_string() == "AB");
    CHECK(PhaseSet::parse("C").count() == 1);
    CHECK_THROWS_AS(PhaseSet::parse(""), ValidationError);
    CHECK_THROWS_AS(PhaseSet::parse("BA"), ValidationError);
    CHECK_THROWS_AS(PhaseSet::parse("AA"), ValidationError);
    CHECK_THROWS_AS(PhaseSet::parse("AD"), ValidationError);
}

TEST_CASE("build_circuit resolves the worked component set") {
    // one transformer, one cable, one capacitor, one load on a ten-node bed
    Circuit c = chain_circuit(10);
    TransformerSpec t;
    t.id = "TR1";
    t.from_node = "N5";
    t.to_node = "N9";
    t.kva_rating = 1500;
    t.prim_kv_ll = 12;
    t.sec_kv_ll = 0.48;
    t.x0r0_ratio = 10;
    t.x1r1_ratio = 10;
    t.z0_pct = 6;
    t.z1_pct = 6;
    c.transformers.push_back(t);
    CapacitorBank cap;
    cap.id = "CAP2";
    cap.node = "N4";
    cap.rated_kv = 7.2;
    cap.total_kvar = 1200;
    cap.phases = PhaseSet::abc();
    cap.config = WindingConfig::Y;
    cap.sense_on_v = 121;
    cap.sense_off_v = 126;
    cap.pt_ratio = 60;
    c.capacitors.push_back(cap);
    c.loads.push_back(abc_load("LD1", "N4", 3000, 1800));

    Circuit built = build_circuit(std::move(c));
    CHECK(built.transformers.size() == 1);
    CHECK(built.capacitors.size() == 1);
    CHECK(built.loads.size() == 1);
    CHECK(built.node_index("N9") == 8);
    CHECK(built.node_at("N4").id == "N4");
}

TEST_CASE("single node with a source is a valid circuit") {
    Circuit c;
    c.nodes.push_back({"N1", std::nullopt, std::nullopt});
    c.sources.push_back({"N1", 12.0, 1.0, 0.0});
    Circuit built = build_circuit(std::move(c));
    CHECK(built.nodes.size() == 1);
    Summary s = circuit_summary(built);
    CHECK(s.nodes == 1);
    CHECK(s.loads == 0);
    CHECK(s.total_load_kw == 0);
}

TEST_CASE("build_circuit rejects invalid inputs") {
    SUBCASE("duplicate component id") {
        Circuit c = chain_circuit(3);
        c.loads.push_back(abc_load("LD1", "N2", 100, 50));
        c.loads.push_back(abc_load("LD1", "N3", 100, 50));
        CHECK_THROWS_WITH_AS(build_circuit(std::move(c)),
                             doctest::Contains("DuplicateId"), ValidationError);
    }
    SUBCASE("dangling node reference") {
        Circuit c = chain_circuit(3);
        c.loads.push_back(abc_load("LD1", "N7", 100, 50));
        CHECK_THROWS_WITH_AS(build_circuit(std::move(c)),
                             doctest::Contains("DanglingNodeRef"), ValidationError);
    }
    SUBCASE("no source") {
        Circuit c = chain_circuit(3);
        c.sources.clear();
        CHECK_THROWS_WITH_AS(build_circuit(std::move(c)), doctest::Contains("NoSource"),
                             ValidationError);
    }
    SUBCASE("multiple sources") {
        Circuit c = chain_circuit(3);
        c.sources.push_back({"N2", 12.0, 1.0, 0.0});
        CHECK_THROWS_WITH_AS(build_circuit(std::move(c)),
                             doctest::Contains("MultipleSources"), ValidationError);
    }
    SUBCASE("source voltage_pu out of range") {
        Circuit c = chain_circuit(2);
        c.sources.front().voltage_pu = 1.6;
        CHECK_THROWS_AS(build_circuit(std::move(c)), ValidationError);
    }
    SUBCASE("equal winding voltages only for Y-Y units") {
        Circuit c = chain_circuit(3);
        TransformerSpec t;
        t.id = "TX";
        t.from_node = "N2";
        t.to_node = "N3";
        t.kva_rating = 500;
        t.prim_kv_ll = 12;
        t.sec_kv_ll = 12;
        t.x0r0_ratio = t.x1r1_ratio = 8;
        t.z0_pct = t.z1_pct = 5;
        t.prim_config = WindingConfig::D;
        t.sec_config = WindingConfig::Yg;
        c.transformers.push_back(t);
        CHECK_THROWS_AS(build_circuit(std::move(c)), ValidationError);

        Circuit c2 = chain_circuit(3);
        t.prim_config = WindingConfig::Y;
        t.sec_config = WindingConfig::Yg;
        c2.transformers.push_back(t);
        CHECK_NOTHROW(build_circuit(std::move(c2))); // isolation unit
    }
    SUBCASE("single-phase delta devices are unbuildable") {
        Circuit c = chain_circuit(2);
        SpotLoad l = abc_load("LD1", "N2", 90, 30);
        l.phases = PhaseSet::parse("A");
        l.config = WindingConfig::D;
        l.kw_per_phase = {30, 0, 0};
        l.kvar_per_phase = {10, 0, 0};
        CHECK_THROWS_AS((c.loads.push_back(l), build_circuit(std::move(c))), ValidationError);
    }
    SUBCASE("power on a phase outside the device's set") {
        Circuit c = chain_circuit(2);
        SpotLoad l = abc_load("LD1", "N2", 90, 30);
        l.phases = PhaseSet::parse("AB");
        CHECK_THROWS_AS((c.loads.push_back(l), build_circuit(std::move(c))), ValidationError);
    }
}

TEST_CASE("every branch endpoint resolves in the node set") {
    Circuit c = chain_circuit(10);
    Circuit built = build_circuit(std::move(c));
    for (const auto& l : built.lines) {
        CHECK(built.has_node(l.from_node));
        CHECK(built.has_node(l.to_node));
    }
}

TEST_CASE("validate_topology on a healthy radial chain") {
    Circuit c = build_circuit(chain_circuit(10));
    ValidationReport report = validate_topology(c);
    CHECK(report.clean());
    CHECK(report.finding_count() == 0);
}

TEST_CASE("open switch isolates its subtree") {
    Circuit c = chain_circuit(7);
    c.lines.pop_back(); // cut N6-N7
    Switch s;
    s.id = "SW1";
    s.from_node = "N6";
    s.to_node = "N7";
    s.phases = PhaseSet::abc();
    s.status = SwitchStatus::Open;
    c.switches.push_back(s);
    ValidationReport report = validate_topology(build_circuit(std::move(c)));
    REQUIRE(report.unreachable.size() == 1);
    CHECK(report.unreachable[0] == "N7");
}

namespace {

// Exhaustive DFS cycle enumeration over an undirected multigraph, the
// reference for the cycle reports below.
struct EdgeRef {
    int u, v;
    std::string id;
};

void dfs_cycles(int start, int node, int parent_edge, const std::vector<EdgeRef>& edges,
                std::vector<int>& path, std::vector<char>& on_path,
                std::set<std::set<std::string>>& found) {
    for (int e = 0; e < int(edges.size()); ++e) {
        if (e == parent_edge) continue;
        const EdgeRef& edge = edges[size_t(e)];
        int next = -1;
        if (edge.u == node) next = edge.v;
        else if (edge.v == node) next = edge.u;
        else continue;
        if (next == start && path.size() >= 2) {
            std::set<std::string> ids;
            for (int pe : path) ids.insert(edges[size_t(pe)].id);
            ids.insert(edge.id);
            found.insert(ids);
            continue;
        }
        if (on_path[size_t(next)]) continue;
        on_path[size_t(next)] = 1;
        path.push_back(e);
        dfs_cycles(start, next, e, edges, path, on_path, found);
        path.pop_back();
        on_path[size_t(next)] = 0;
    }
}

std::set<std::set<std::string>> enumerate_cycles(int n_nodes,
                                                 const std::vector<EdgeRef>& edges) {
    std::set<std::set<std::string>> found;
    for (int start = 0; start < n_nodes; ++start) {
        std::vector<int> path;
        std::vector<char> on_path(size_t(n_nodes), 0);
        on_path[size_t(start)] = 1;
        dfs_cycles(start, start, -1, edges, path, on_path, found);
    }
    return found;
}

}  // namespace

TEST_CASE("four-node ring reports exactly the enumerated cycle") {
    Circuit c = chain_circuit(4);
    LineSegment back;
    back.id = "L4";
    back.from_node = "N4";
    back.to_node = "N1";
    back.phases = PhaseSet::abc();
    back.impedance = SequenceImpedance{0.01, 0.01, 0, 0.02, 0.02, 0};
    back.ampacity = {400, 400, 400};
    c.lines.push_back(back);

    std::vector<EdgeRef> edges = {
        {0, 1, "L1"}, {1, 2, "L2"}, {2, 3, "L3"}, {3, 0, "L4"}};
    auto expected = enumerate_cycles(4, edges);
    REQUIRE(expected.size() == 1);

    ValidationReport report = validate_topology(build_circuit(std::move(c)));
    REQUIRE(report.cycles.size() == 1);
    std::set<std::string> got(report.cycles[0].begin(), report.cycles[0].end());
    CHECK(got == *expected.begin());
}

TEST_CASE("a tree stays cycle-free and one extra branch makes exactly one cycle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + int(rng() % 12);
        Circuit c;
        for (int i = 1; i <= n; ++i)
            c.nodes.push_back({"N" + std::to_string(i), std::nullopt, std::nullopt});
        c.sources.push_back({"N1", 12.0, 1.0, 0.0});
        for (int i = 1; i < n; ++i) {
            LineSegment l;
            l.id = "L" + std::to_string(i);
            l.from_node = "N" + std::to_string(1 + int(rng() % uint64_t(i)));
            l.to_node = "N" + std::to_string(i + 1);
            l.phases = PhaseSet::abc();
            l.impedance = SequenceImpedance{0.01, 0.01, 0, 0.02, 0.02, 0};
            c.lines.push_back(std::move(l));
        }
        Circuit tree = build_circuit(std::move(c));
        CHECK(validate_topology(tree).cycles.empty());

        int a = int(rng() % uint64_t(n)) + 1;
        int b = int(rng() % uint64_t(n)) + 1;
        if (a == b) b = a == n ? 1 : a + 1;
        LineSegment extra;
        extra.id = "EXTRA";
        extra.from_node = "N" + std::to_string(a);
        extra.to_node = "N" + std::to_string(b);
        extra.phases = PhaseSet::abc();
        extra.impedance = SequenceImpedance{0.01, 0.01, 0, 0.02, 0.02, 0};
        tree.lines.push_back(std::move(extra));
        ValidationReport report = validate_topology(build_circuit(std::move(tree)));
        CHECK(report.cycles.size() == 1);
    }
}

TEST_CASE("phase delivery violations are reported") {
    Circuit c = chain_circuit(3);
    c.lines[1].phases = PhaseSet::parse("AB"); // N2-N3 carries AB only
    c.lines[1].ampacity = {400, 400, 0};
    c.loads.push_back(abc_load("LD1", "N3", 90, 30)); // wants ABC at N3
    ValidationReport report = validate_topology(build_circuit(std::move(c)));
    REQUIRE(report.phase_violations.size() == 1);
    CHECK(report.phase_violations[0].component == "LD1");
}

TEST_CASE("summary totals") {
    Circuit c = chain_circuit(3);
    c.loads.push_back(abc_load("LD1", "N2", 3000, 1800));
    c.loads.push_back(abc_load("LD2", "N3", 4500, 2700));
    CapacitorBank cap;
    cap.id = "CB1";
    cap.node = "N2";
    cap.rated_kv = 7.2;
    cap.total_kvar = 1200;
    cap.phases = PhaseSet::abc();
    cap.config = WindingConfig::Y;
    c.capacitors.push_back(cap);
    Summary s = circuit_summary(build_circuit(std::move(c)));
    CHECK(s.nodes == 3);
    CHECK(s.loads == 2);
    CHECK(s.capacitors == 1);
    CHECK(s.total_load_kw == doctest::Approx(7500).epsilon(1e-12));
    CHECK(s.total_cap_kvar == doctest::Approx(1200).epsilon(1e-12));
    CHECK(summary_line(s).find("nodes=3") == 0);
}
