#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridhub/circuit.hpp"

namespace gridhub {

/// Lightweight handle onto one series branch of a circuit.
struct BranchRef {
    enum Kind { Line, Transformer, Switch } kind = Line;
    int index = 0;
};

const std::string& branch_id(const Circuit& c, BranchRef b);
const std::string& branch_from(const Circuit& c, BranchRef b);
const std::string& branch_to(const Circuit& c, BranchRef b);
bool branch_closed(const Circuit& c, BranchRef b);
PhaseSet branch_phases(const Circuit& c, BranchRef b); // transformers deliver ABC

/// BFS view of the circuit over closed branches, rooted at the source.
/// Deterministic: adjacency follows component declaration order.
struct RadialGraph {
    int source = -1;
    std::vector<std::vector<std::pair<int, BranchRef>>> adj; // closed branches only
    std::vector<char> reachable;
    std::vector<int> order;                 // reachable nodes in BFS order, source first
    std::vector<int> parent;                // -1 at source / unreachable
    std::vector<BranchRef> parent_branch;   // valid where parent >= 0
    std::vector<PhaseSet> delivered;        // phases available at each reachable node
    std::vector<std::vector<std::string>> cycles; // branch ids, one list per independent cycle
};

RadialGraph build_radial_graph(const Circuit& c);

}  // namespace gridhub
