#pragma once

#include <string>
#include <vector>

#include "gridhub/circuit.hpp"

namespace gridhub {

enum class FormatTag { Up, Dss, Glm };

FormatTag parse_format_tag(const std::string& text); // "up" | "dss" | "glm"

/// One importer per format: up reads a workbook directory, dss/glm read
/// script files.
Circuit import_any(const std::string& path, FormatTag format, bool lenient = false);

/// One exporter per format.
void export_any(const Circuit& c, const std::string& path, FormatTag format);

/// Runs one CLI invocation (args exclude the program name) and returns the
/// process exit code: 0 ok, 1 validation error or findings, 2 parse/input
/// error, 3 non-convergence, 4 comparison failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace gridhub
