#pragma once

// Shared rendering between persist_run (per-run report.txt) and the
// report command.

#include <string>
#include <vector>

#include "eager/harness.hpp"

namespace eager::detail {

struct RecordRow {
  std::string label;      // subdirectory or file stem
  bool ok = false;
  std::string error;      // set for unreadable records
  RunRecord record;       // valid when ok
};

/// Metrics table (p@k / c@k / PR / #T / #S) plus token-savings lines for
/// regime pairs found in the rows.
std::string render_rows(const std::vector<RecordRow>& rows);

/// Machine-readable counterpart of render_rows.
std::string render_rows_json(const std::vector<RecordRow>& rows);

}  // namespace eager::detail
