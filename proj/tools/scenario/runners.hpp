#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace ebl::scenario {

/// Command-line overrides shared by every subcommand.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Overrides the primary tolerance: deficit_tol (deficit, catalog),
  /// max_residual (pde-check) or the |z| bound (simulate).
  std::optional<double> tol;
};

/// Result of one scenario (or one catalog row set). JSON is the superset; the
/// CSV rows follow the frozen per-command header.
struct Report {
  std::string id;
  json body;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  bool pass = true;
};

enum class Format { json, csv };

/// Shortest round-trip decimal ("%.17g"), with inf / -inf / nan spelled out.
std::string format_double(double v);

Report run_deficit(const Scenario& s, const RunOptions& options = {});
Report run_pde_check(const Scenario& s, const RunOptions& options = {});
Report run_simulate(const Scenario& s, const RunOptions& options = {});

/// Merges reports sorted by id (stable) into one document. JSON output is
/// {"command", "version", "pass", "reports": [...]}; CSV output is the shared
/// header followed by every row.
std::string render(const std::string& command, std::vector<Report> reports, Format format);

}  // namespace ebl::scenario
