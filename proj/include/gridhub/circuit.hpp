#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "gridhub/phases.hpp"
#include "gridhub/types.hpp"

namespace gridhub {

struct Node {
    std::string id;
    std::optional<double> nominal_kv_ll;            // > 0 when present
    std::optional<std::pair<double, double>> coord; // unitless schematic position
};

/// Total ohms for the section (not per unit length); b fields are total
/// shunt charging in microsiemens.
struct SequenceImpedance {
    double r1 = 0, x1 = 0, b1 = 0;
    double r0 = 0, x0 = 0, b0 = 0;

    Complex z1() const { return {r1, x1}; }
    Complex z0() const { return {r0, x0}; }
};

/// Direct per-phase representation. Rows/cols of absent phases are zero;
/// z must be symmetric within 1e-12 relative.
struct PhaseImpedanceMatrix {
    Mat3c z = Mat3c::Zero();       // ohms
    Mat3c b_shunt = Mat3c::Zero(); // microsiemens (may be zero)
};

using Impedance = std::variant<SequenceImpedance, PhaseImpedanceMatrix>;

enum class LineKind { Cable, Overhead };

struct LineSegment {
    std::string id;
    std::string from_node;
    std::string to_node;
    PhaseSet phases;
    Impedance impedance;
    double length_ft = 0;                  // informational, never multiplied
    std::array<double, 3> ampacity{};      // amps per phase; zero on absent phases
    LineKind kind = LineKind::Cable;

    bool has_sequence() const { return std::holds_alternative<SequenceImpedance>(impedance); }
    const SequenceImpedance& sequence() const { return std::get<SequenceImpedance>(impedance); }
    const PhaseImpedanceMatrix& matrix() const { return std::get<PhaseImpedanceMatrix>(impedance); }
};

enum class WindingConfig { D, Y, Yg };

struct TransformerSpec {
    std::string id;
    std::string from_node; // primary side
    std::string to_node;   // secondary side
    double kva_rating = 0;
    double prim_kv_ll = 0;
    double sec_kv_ll = 0;
    double x0r0_ratio = 0;
    double x1r1_ratio = 0;
    double z0_pct = 0;
    double z1_pct = 0;
    WindingConfig prim_config = WindingConfig::D;
    WindingConfig sec_config = WindingConfig::Yg;
};

enum class CapStatus { On, Off };

struct CapacitorBank {
    std::string id;
    std::string node;
    CapStatus status = CapStatus::On;
    double rated_kv = 0;   // line-to-neutral for Y/Yg banks, line-to-line for D
    double total_kvar = 0; // all phases together
    PhaseSet phases;
    WindingConfig config = WindingConfig::Y;
    std::optional<double> sense_on_v;  // PT secondary volts
    std::optional<double> sense_off_v;
    std::optional<double> pt_ratio;
    std::optional<std::string> control_voltage_node;
    bool synthetic = false; // true for banks materialized from line charging
};

struct SpotLoad {
    std::string id;
    std::string node;
    PhaseSet phases;
    WindingConfig config = WindingConfig::Yg;
    std::array<double, 3> kw_per_phase{};
    std::array<double, 3> kvar_per_phase{};
    std::optional<double> rated_kv; // descriptive; solver uses node nominal voltage
};

/// Injections modeled as negative load.
struct Generator {
    std::string id;
    std::string node;
    PhaseSet phases;
    WindingConfig config = WindingConfig::Yg;
    std::array<double, 3> kw_per_phase{};
    std::array<double, 3> kvar_per_phase{};
    std::optional<double> rated_kv;
};

enum class SwitchStatus { Closed, Open };

struct Switch {
    std::string id;
    std::string from_node;
    std::string to_node;
    PhaseSet phases;
    SwitchStatus status = SwitchStatus::Closed;
};

struct Source {
    std::string node;
    double kv_ll = 0;
    double voltage_pu = 1.0;
    double angle_deg = 0.0;
};

/// Opaque sidecar data a lenient workbook read carries through conversion.
struct ExtraSheet {
    std::string name;
    std::string raw; // verbatim file content
};

struct ExtraColumns {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> cells; // one entry per data row, positional
};

/// Canonical in-memory circuit. Values are immutable after build_circuit;
/// transform passes return modified copies.
struct Circuit {
    std::vector<Node> nodes;
    std::vector<LineSegment> lines;
    std::vector<TransformerSpec> transformers;
    std::vector<Switch> switches;
    std::vector<CapacitorBank> capacitors;
    std::vector<SpotLoad> loads;
    std::vector<Generator> generators;
    std::vector<Source> sources; // exactly one after build_circuit

    std::vector<ExtraSheet> extra_sheets;
    std::map<std::string, ExtraColumns> extra_columns; // keyed by sheet name

    const Source& source() const { return sources.front(); }

    /// -1 when absent.
    int node_index(std::string_view id) const;
    const Node& node_at(std::string_view id) const;
    bool has_node(std::string_view id) const { return node_index(id) >= 0; }

    std::unordered_map<std::string, int> node_index_; // id -> position in nodes
};

/// Validates references, id uniqueness, per-component invariants, and the
/// single-source rule; returns the circuit with its node index built.
/// Throws ValidationError (DuplicateId, DanglingNodeRef, MultipleSources,
/// NoSource, invalid component values). Input order is preserved.
Circuit build_circuit(Circuit parts);

struct ValidationReport {
    std::vector<std::string> unreachable;         // node ids cut off from the source
    std::vector<std::vector<std::string>> cycles; // each entry lists branch ids of one cycle

    struct PhaseViolation {
        std::string component;
        std::string detail;
    };
    std::vector<PhaseViolation> phase_violations;

    struct Warning {
        std::string component;
        std::string message;
    };
    std::vector<Warning> warnings;

    bool clean() const {
        return unreachable.empty() && cycles.empty() && phase_violations.empty() &&
               warnings.empty();
    }
    int finding_count() const {
        return int(unreachable.size() + cycles.size() + phase_violations.size() +
                   warnings.size());
    }
};

/// Reachability from the source over closed branches, cycle detection,
/// phase-delivery consistency, and per-component warnings.
ValidationReport validate_topology(const Circuit& c);

struct Summary {
    int nodes = 0;
    int lines = 0;
    int transformers = 0;
    int switches = 0;
    int capacitors = 0;
    int loads = 0;
    int generators = 0;
    double total_load_kw = 0;
    double total_load_kvar = 0;
    double total_cap_kvar = 0;
    double total_gen_kw = 0;
    double total_gen_kvar = 0;
};

Summary circuit_summary(const Circuit& c);

/// One-line rendering used by the CLI.
std::string summary_line(const Summary& s);

std::string_view config_name(WindingConfig c); // "D" / "Y" / "Yg"
WindingConfig parse_config(std::string_view text);

}  // namespace gridhub
