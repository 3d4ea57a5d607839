#pragma once

#include "gridhub/circuit.hpp"

namespace gridhub {

/// Capability gaps of a conversion target, one flag per gap.
struct LoweringOptions {
    bool target_needs_abc = false;
    bool target_lacks_line_charging = false;
    bool target_needs_node_voltages = false;

    static LoweringOptions glm_preset() { return {true, true, true}; }
    static LoweringOptions dss_preset() { return {false, false, false}; }
};

/// Symmetric-component similarity transform with Z2 = Z1:
/// Zs = (Z0 + 2 Z1)/3 on the diagonal, Zm = (Z0 - Z1)/3 off-diagonal,
/// restricted to the member phases. The shunt matrix is built identically
/// from (B0, B1); susceptance values live in the real parts.
PhaseImpedanceMatrix sequence_to_phase(const SequenceImpedance& s, PhaseSet phases);

/// Inverse direction: Z1 = Zs - Zm, Z0 = Zs + 2 Zm over the present
/// submatrix. Requires equal diagonals and equal off-diagonals within
/// 1e-6 relative; throws ValidationError (NotBalanced) otherwise.
/// Single-phase matrices carry no mutual term, so Z0 comes back equal to Z1.
SequenceImpedance phase_to_sequence(const PhaseImpedanceMatrix& m);

/// Breadth-first from the source node; lines and switches copy voltage
/// across, transformers map primary<->secondary in traversal direction.
/// Pre-existing explicit voltages are kept and checked for consistency
/// (VoltageConflict beyond 1e-6 relative). Unreachable nodes without an
/// explicit voltage raise Unreachable. Idempotent.
Circuit propagate_nominal_voltages(Circuit c);

/// Replaces total positive-sequence charging B of every segment with two
/// synthetic capacitor banks, one per endpoint, each sized
/// Q_phase = V_LN^2 * (B/2) per present phase at the endpoint's nominal
/// voltage. Segment b fields are zeroed. Synthetic ids are
/// "<segment>__chg_from" / "<segment>__chg_to". Idempotent.
Circuit lower_line_charging(Circuit c);

/// Inverse convenience for workbook export: folds synthetic charging banks
/// back into their segment's b1 and drops them. Zero-sequence charging was
/// zeroed at lowering time and is not reconstructed.
Circuit fold_charging_capacitors(Circuit c);

struct TransformerImpedance {
    double r1_pu = 0, x1_pu = 0;
    double r0_pu = 0, x0_pu = 0;
};

/// Splits Z% and X/R into R + jX per sequence on the transformer's own
/// kVA base: R = (Z/100)/sqrt(1+k^2), X = k R.
TransformerImpedance transformer_impedance(const TransformerSpec& t);

/// Applies, in order: propagate_nominal_voltages (when voltages or charging
/// are needed), lower_line_charging, then sequence_to_phase on every
/// sequence-form segment. Deterministic.
Circuit lower_for_target(Circuit c, const LoweringOptions& opts);

/// Total positive-sequence charging susceptance of a segment in
/// microsiemens, whichever impedance form it carries.
double segment_charging_b1_us(const LineSegment& l);

}  // namespace gridhub
