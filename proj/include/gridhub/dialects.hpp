#pragma once

#include <string>
#include <vector>

#include "gridhub/circuit.hpp"

namespace gridhub {

struct DialectOptions {
    /// Lenient imports turn unknown statement classes and keys into
    /// warnings; strict (default) rejects them with a located error.
    bool lenient = false;
};

/// Deterministic script text: preamble, bus declarations, then components
/// in canonical class order (lines, transformers, switches, capacitors,
/// loads, generators), each class in input order. Sequence impedances stay
/// in R1/X1/R0/X0 ohm form with charging in microsiemens; phase-matrix
/// segments use rmatrix/xmatrix/bmatrix.
std::string export_dss(const Circuit& c);

Circuit import_dss(const std::string& text, const DialectOptions& opts = {},
                   std::vector<std::string>* warnings = nullptr);

/// Requires a GLM-lowered circuit: phase-matrix lines only, zero charging,
/// every node voltage assigned (ValidationError "NotLowered" otherwise).
/// Node blocks carry nominal_voltage in volts line-to-neutral at millivolt
/// resolution; everything else is lossless.
std::string export_glm(const Circuit& c);

/// Lossless import: keeps phase-matrix impedances as-is. Implied kV from
/// nominal_voltage fields snaps to the nearest short decimal (<= 5e-6
/// relative), recovering nominal-class voltages exactly.
Circuit import_glm(const std::string& text, const DialectOptions& opts = {},
                   std::vector<std::string>* warnings = nullptr);

/// A <-> .1, B <-> .2, C <-> .3
std::string phase_suffix(PhaseSet phases);
PhaseSet parse_phase_suffix(const std::string& suffix);

}  // namespace gridhub
