#pragma once

#include <cstdint>

#include "gridhub/circuit.hpp"

namespace gridhub::testing {

/// Schema-expressible random circuit (sequence-form lines, closed switches,
/// no load rated_kv) of up to max_nodes nodes. All numeric fields are
/// quantized to short decimals so text round-trips are lossless; nominal
/// voltages come from a realistic class set. Deterministic per seed.
Circuit random_roundtrip_circuit(uint64_t seed, int max_nodes = 30);

/// Small solvable circuit for solver/oracle equivalence: modest loading,
/// consistent phasing, sometimes matrix-form (coupled) lines, sometimes a
/// transformer or mid-feeder switch.
Circuit random_solvable_circuit(uint64_t seed, int max_nodes = 5);

}  // namespace gridhub::testing
