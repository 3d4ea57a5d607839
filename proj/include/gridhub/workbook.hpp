#pragma once

#include <string>
#include <vector>

#include "gridhub/circuit.hpp"

namespace gridhub {

struct WorkbookOptions {
    /// Accept and preserve unknown extra columns instead of rejecting them.
    bool lenient = false;
};

/// Reads a unified-workbook directory (one CSV per sheet, bit-exact
/// headers) into a validated Circuit. Missing sheet files are empty
/// sheets; unknown sheet files are preserved verbatim. Numeric cells are
/// '.'-decimal; blank optional cells mean "unspecified".
Circuit read_workbook(const std::string& dir, const WorkbookOptions& opts = {});

/// Emits every known sheet (header-only when empty), round-tripping
/// read_workbook exactly: strings byte-identical, numerics shortest
/// exact decimal.
void write_workbook(const Circuit& c, const std::string& dir);

/// Canonical sheet names in emission order.
const std::vector<std::string>& workbook_sheet_names();

/// Canonical header row of one sheet (single source of truth).
const std::vector<std::string>& workbook_sheet_header(const std::string& sheet);

}  // namespace gridhub
