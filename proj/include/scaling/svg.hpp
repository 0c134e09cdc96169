#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scaling {

// Minimal CSV table: header names and string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by name; throws DomainError when missing.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

// Bound-vs-width curves from `curve` CSV output: log-log axes, one polyline
// per budget, a marker at each curve's minimum. Rows whose status is not "ok"
// are skipped.
std::string render_curve_svg(std::string_view csv);

// Parameter count against T* from `frontier` CSV output, with the fitted
// log-log line and a dashed slope-1 reference.
std::string render_frontier_svg(std::string_view csv);

}  // namespace scaling
