#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "circuit_compare.hpp"
#include "generators.hpp"
#include "gridhub/errors.hpp"
#include "gridhub/workbook.hpp"

using namespace gridhub;
namespace fs = std::filesystem;

namespace {

const char* kFixture = "fixtures/test-circuit.updir";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gridhub-wb-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("bundled fixture reads with the documented contents") {
    Circuit c = read_workbook(kFixture);
    CHECK(c.nodes.size() == 10);
    CHECK(c.lines.size() == 6);
    CHECK(c.transformers.size() == 1);
    CHECK(c.switches.size() == 2);
    CHECK(c.capacitors.size() == 2);
    CHECK(c.loads.size() == 6);
    CHECK(c.generators.empty());

    const TransformerSpec& t = c.transformers[0];
    CHECK(t.id == "TR1");
    CHECK(t.from_node == "N5");
    CHECK(t.to_node == "N9");
    CHECK(t.kva_rating == 1500);
    CHECK(t.prim_kv_ll == 12);
    CHECK(t.sec_kv_ll == 0.48);
    CHECK(t.x0r0_ratio == 10);
    CHECK(t.x1r1_ratio == 10);
    CHECK(t.z0_pct == 6);
    CHECK(t.z1_pct == 6);
    CHECK(t.prim_config == WindingConfig::D);
    CHECK(t.sec_config == WindingConfig::Yg);

    const LineSegment& c1 = c.lines[0];
    CHECK(c1.id == "C1");
    CHECK(c1.kind == LineKind::Cable);
    REQUIRE(c1.has_sequence());
    CHECK(c1.sequence().r1 == 0.01);
    CHECK(c1.sequence().x1 == 0.012);
    CHECK(c1.sequence().b1 == 12.091);
    CHECK(c1.sequence().r0 == 0.054);
    CHECK(c1.sequence().x0 == 0.015);
    CHECK(c1.sequence().b0 == 12.091);
    CHECK(c1.length_ft == 341);
    CHECK(c1.ampacity == std::array<double, 3>{473, 473, 473});

    const CapacitorBank& cap = c.capacitors[1];
    CHECK(cap.id == "CAP2");
    CHECK(cap.node == "N4");
    CHECK(!cap.control_voltage_node);
    CHECK(cap.status == CapStatus::On);
    CHECK(cap.rated_kv == 7.2);
    CHECK(cap.total_kvar == 1200);
    CHECK(cap.config == WindingConfig::Y);
    CHECK(cap.sense_on_v == 121.0);
    CHECK(cap.sense_off_v == 126.0);
    CHECK(cap.pt_ratio == 60.0);

    // loads carry per-phase values; totals reproduce the load schedule
    double total_kw = 0;
    for (const auto& l : c.loads)
        for (Phase p : kAllPhases) total_kw += l.kw_per_phase[size_t(p)];
    CHECK(total_kw == doctest::Approx(16500).epsilon(1e-12));
}

TEST_CASE("write emits the exact capacitor row shape") {
    Circuit c = read_workbook(kFixture);
    TempDir dir;
    write_workbook(c, dir.str());
    std::string cap_sheet = slurp(dir.path / "capacitor.csv");
    CHECK(cap_sheet.find("CAP2,N4,,On,7.2,1200,ABC,Y,121,126,60\n") != std::string::npos);
}

TEST_CASE("single-phase load writes zeros on the silent phases") {
    Circuit c;
    c.nodes.push_back({"N1", std::nullopt, std::nullopt});
    c.sources.push_back({"N1", 12.0, 1.0, 0.0});
    SpotLoad l;
    l.id = "LD1";
    l.node = "N1";
    l.phases = PhaseSet::parse("A");
    l.config = WindingConfig::Yg;
    l.kw_per_phase = {800, 0, 0};
    l.kvar_per_phase = {600, 0, 0};
    c.loads.push_back(l);
    TempDir dir;
    write_workbook(build_circuit(std::move(c)), dir.str());
    CHECK(slurp(dir.path / "load.csv").find("LD1,N1,A,Yg,600,0,0,800,0,0\n") !=
          std::string::npos);
}

TEST_CASE("the two-phase worked load row round-trips") {
    TempDir dir;
    write_workbook(read_workbook(kFixture), dir.str()); // get all sheets in place
    spit(dir.path / "load.csv",
         slurp(dir.path / "load.csv") + "LD6',N10,AB,Yg,600,360,0,800,480,0\n");
    Circuit c = read_workbook(dir.str());
    const SpotLoad& l = c.loads.back();
    CHECK(l.id == "LD6'");
    CHECK(l.node == "N10");
    CHECK(l.phases.to_string() == "AB");
    CHECK(l.config == WindingConfig::Yg);
    CHECK(l.kvar_per_phase == std::array<double, 3>{600, 360, 0});
    CHECK(l.kw_per_phase == std::array<double, 3>{800, 480, 0});
}

TEST_CASE("header drift is rejected with a located HeaderMismatch") {
    TempDir dir;
    write_workbook(read_workbook(kFixture), dir.str());
    std::string cable = slurp(dir.path / "cable.csv");
    auto pos = cable.find("Line R1 Ohms");
    REQUIRE(pos != std::string::npos);
    spit(dir.path / "cable.csv", cable.replace(pos, 12, "R1"));
    CHECK_THROWS_WITH_AS(read_workbook(dir.str()), doctest::Contains("HeaderMismatch"),
                         ParseError);
}

TEST_CASE("bad cells raise located errors") {
    TempDir dir;
    write_workbook(read_workbook(kFixture), dir.str());

    SUBCASE("unparseable number names sheet, row and column") {
        std::string cable = slurp(dir.path / "cable.csv");
        auto pos = cable.find("0.012");
        spit(dir.path / "cable.csv", cable.replace(pos, 5, "zwölf"));
        try {
            read_workbook(dir.str());
            FAIL("expected BadNumber");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("BadNumber") != std::string::npos);
            CHECK(std::string(e.what()).find("Line X1 Ohms") != std::string::npos);
            CHECK(e.line() == 2);
            CHECK(e.column() == 6);
        }
    }
    SUBCASE("blank required cell raises MissingRequired") {
        std::string tr = slurp(dir.path / "transformer.csv");
        auto pos = tr.find(",1500,");
        spit(dir.path / "transformer.csv", tr.replace(pos, 6, ",,"));
        CHECK_THROWS_WITH_AS(read_workbook(dir.str()),
                             doctest::Contains("MissingRequired"), ParseError);
    }
    SUBCASE("power on a phase outside the set is rejected") {
        spit(dir.path / "load.csv",
             slurp(dir.path / "load.csv") + "LDX,N10,AB,Yg,0,0,0,800,480,99\n");
        CHECK_THROWS_WITH_AS(read_workbook(dir.str()),
                             doctest::Contains("phase C"), ParseError);
    }
}

TEST_CASE("missing sheet files are empty sheets") {
    TempDir dir;
    spit(dir.path / "node.csv", "Node Id,kV LL,X,Y\nN1,12,,\n");
    spit(dir.path / "source.csv", "Node,kV LL,Vpu,Angle deg\nN1,12,1,0\n");
    Circuit c = read_workbook(dir.str());
    CHECK(c.nodes.size() == 1);
    CHECK(c.nodes[0].nominal_kv_ll == 12.0);
    CHECK(c.lines.empty());
    CHECK(c.loads.empty());
}

TEST_CASE("unreadable path raises IoError") {
    CHECK_THROWS_AS(read_workbook("/no/such/dir.updir"), IoError);
}

TEST_CASE("fixture round-trips exactly") {
    Circuit a = read_workbook(kFixture);
    TempDir dir;
    write_workbook(a, dir.str());
    Circuit b = read_workbook(dir.str());
    auto diffs = testing::circuit_differences(a, b, 0.0);
    for (const auto& d : diffs) MESSAGE(d);
    CHECK(diffs.empty());
}

TEST_CASE("random circuits round-trip within 1e-9") {
    for (uint64_t seed = 1; seed <= 25; ++seed) {
        Circuit a = testing::random_roundtrip_circuit(seed);
        TempDir dir;
        write_workbook(a, dir.str());
        Circuit b = read_workbook(dir.str());
        auto diffs = testing::circuit_differences(a, b, 1e-9);
        for (const auto& d : diffs) MESSAGE("seed ", seed, ": ", d);
        CHECK(diffs.empty());
    }
}

TEST_CASE("write-then-read never trips the header check") {
    for (uint64_t seed = 100; seed < 105; ++seed) {
        Circuit a = testing::random_roundtrip_circuit(seed);
        TempDir dir;
        write_workbook(a, dir.str());
        CHECK_NOTHROW(read_workbook(dir.str()));
    }
}

TEST_CASE("unknown sheets survive a round-trip verbatim") {
    TempDir dir;
    write_workbook(read_workbook(kFixture), dir.str());
    std::string annotations = "Tag,Value\r\nfeeder,west side\nnotes,\"a, quoted cell\"\n";
    spit(dir.path / "annotations.csv", annotations);

    Circuit c = read_workbook(dir.str());
    REQUIRE(c.extra_sheets.size() == 1);
    CHECK(c.extra_sheets[0].name == "annotations");

    TempDir out;
    write_workbook(c, out.str());
    CHECK(slurp(out.path / "annotations.csv") == annotations);
}

TEST_CASE("extra columns: strict rejects, lenient preserves") {
    TempDir dir;
    write_workbook(read_workbook(kFixture), dir.str());
    std::string breaker = slurp(dir.path / "breaker.csv");
    spit(dir.path / "breaker.csv",
         "Section Id,From Node,To Node,Phase,Status,Crew Note\n"
         "SW1,N2,N3,ABC,Closed,inspect me\n"
         "SW2,N4,N10,ABC,Closed,\n");

    CHECK_THROWS_WITH_AS(read_workbook(dir.str()), doctest::Contains("HeaderMismatch"),
                         ParseError);

    Circuit c = read_workbook(dir.str(), WorkbookOptions{true});
    REQUIRE(c.extra_columns.count("breaker"));
    CHECK(c.extra_columns["breaker"].headers == std::vector<std::string>{"Crew Note"});

    TempDir out;
    write_workbook(c, out.str());
    std::string rewritten = slurp(out.path / "breaker.csv");
    CHECK(rewritten.find("Crew Note") != std::string::npos);
    CHECK(rewritten.find("SW1,N2,N3,ABC,Closed,inspect me") != std::string::npos);
}

TEST_CASE("empty sheets are emitted header-only") {
    Circuit c;
    c.nodes.push_back({"N1", std::nullopt, std::nullopt});
    c.sources.push_back({"N1", 12.0, 1.0, 0.0});
    TempDir dir;
    write_workbook(build_circuit(std::move(c)), dir.str());
    for (const auto& name : workbook_sheet_names()) {
        std::string content = slurp(dir.path / (name + ".csv"));
        CAPTURE(name);
        CHECK(content.find('\n') != std::string::npos);
        bool header_only = content.find('\n') == content.size() - 1;
        if (name != "node" && name != "source") CHECK(header_only);
    }
}
