#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gridhub/types.hpp"

namespace gridhub {

/// Shortest decimal text that parses back to exactly the same double.
/// Exact integers print without a decimal point ("12", not "12.0").
std::string format_double(double v);

/// Fixed-point with the given number of decimals (no trailing trim).
std::string format_fixed(double v, int decimals);

/// Complex in "a+bj" / "a-bj" form, shortest-exact parts.
std::string format_complex(Complex z);

/// Strict full-consumption parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

std::optional<Complex> parse_complex(std::string_view text);

/// Fewest-significant-digit decimal within rel_tol of x (x itself when no
/// shorter decimal qualifies). Used to recover nominal-class values from
/// reduced-precision wire fields.
double shortest_within(double x, double rel_tol);

}  // namespace gridhub
