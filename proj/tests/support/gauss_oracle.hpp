#pragma once

#include <map>
#include <string>

#include "gridhub/circuit.hpp"

namespace gridhub::testing {

struct OracleSolution {
    bool converged = false;
    int iterations = 0;
    std::map<std::string, Vec3c> volts; // line-to-neutral volts per energized node
};

/// Independent full-network load-flow reference: block nodal admittance
/// matrix plus Gauss-Seidel fixed-point iteration on node voltages, with
/// closed switches collapsed into supernodes. Shares only the component
/// model definitions with the production solver, not its solution method.
OracleSolution gauss_reference_solve(const Circuit& c, double tol_v = 1e-10,
                                     int max_iter = 2000000);

}  // namespace gridhub::testing
