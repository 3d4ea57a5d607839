#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridhub/circuit.hpp"

namespace gridhub {

struct SolveOptions {
    double tol_pu = 1e-8; // max per-phase voltage change between sweeps
    int max_iter = 50;
    bool flat_start = true;
};

/// Backward/forward-sweep result. Voltages are line-to-neutral volts per
/// energized phase; bus through-power is the power delivered into the
/// subtree at that bus (local shunts plus everything downstream), the
/// quantity a feeder-head report tabulates per bus.
struct PowerFlowSolution {
    struct NodeVoltage {
        std::string id;
        PhaseSet phases;
        Vec3c v; // zero on absent phases
    };
    struct BranchFlow {
        std::string id;
        double send_kw = 0, send_kvar = 0; // at the end nearer the source
        double recv_kw = 0, recv_kvar = 0;
    };
    struct BusPower {
        std::string id;
        double kw = 0, kvar = 0;
    };

    std::vector<NodeVoltage> node_voltages; // energized nodes, BFS order
    std::vector<BranchFlow> branch_flows;   // energized tree branches
    std::vector<BusPower> bus_through;      // same node order as node_voltages
    int iterations = 0;
    double max_mismatch_pu = 0;
    bool converged = false;
    double tol_pu = 0;

    const NodeVoltage* find_voltage(std::string_view id) const;
    const BusPower* find_bus(std::string_view id) const;
};

/// Constant-PQ loads and generators, constant-impedance capacitors,
/// pi-model line charging on the positive-sequence susceptance, ideal-ratio
/// transformers with series Z1 and the standard 30-degree shift across
/// D-wye units. Returns converged=false instead of throwing when the
/// iteration cap is hit; throws NotRadial / MissingVoltage for circuits
/// the method cannot represent.
PowerFlowSolution solve(const Circuit& c, const SolveOptions& o = {});

struct PowerResidual {
    double kw = 0;
    double kvar = 0;
};

/// Source injection minus loads, series losses, and shunt exchanges,
/// evaluated from the solved voltages. Near zero only for a converged
/// solution.
PowerResidual power_balance_residual(const Circuit& c, const PowerFlowSolution& s);

/// Per-bus P/Q pairs, the comparable core of a solution or a report file.
struct BusPowerTable {
    struct Row {
        std::string bus;
        double kw = 0, kvar = 0;
    };
    std::vector<Row> rows;
};

BusPowerTable bus_power_table(const PowerFlowSolution& s);

struct DiffReport {
    struct Row {
        std::string bus;
        char quantity = 'P'; // 'P' or 'Q'
        double value_a = 0, value_b = 0;
        double abs_diff = 0;
        double rel_diff = 0; // relative to the largest compared magnitude
        bool within = false;
    };
    std::vector<Row> rows;
    std::vector<std::string> missing_in_a, missing_in_b;
    double worst_rel_diff = 0;
    double rel_tol = 0;
    bool pass = false;
};

/// Row-by-row comparison. rel_diff is normalized by the largest magnitude
/// in either table so small-flow buses do not drown the verdict; rows with
/// an absolute difference of at most 1 kW / 1 kVAR always pass. Missing
/// buses are reported and fail the comparison.
DiffReport compare_tables(const BusPowerTable& a, const BusPowerTable& b, double rel_tol);

DiffReport compare_solutions(const PowerFlowSolution& a, const PowerFlowSolution& b,
                             double rel_tol);

/// "Bus,Active Power (kW),Reactive Power (kVAR)" with one-decimal fixed
/// values, one row per bus.
std::string render_report(const BusPowerTable& t);

BusPowerTable parse_report(const std::string& text, const std::string& file_for_errors);

std::string render_diff(const DiffReport& d);

}  // namespace gridhub
