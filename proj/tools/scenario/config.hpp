#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ebl/diffusion.hpp"
#include "ebl/equality.hpp"
#include "json_io.hpp"

namespace ebl::scenario {

/// Step ladder and evaluation grid for pde-check.
struct PdeCheckSpec {
  std::vector<double> t{0.25, 0.5, 0.75};
  std::vector<double> x{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> y{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> dt{1e-5, 5e-6};  // each entry half (or any fraction) of the previous
  double dx = 1e-3;
  TimeStencil stencil = TimeStencil::forward;
  std::optional<double> max_residual;                  // applies at the first dt
  std::optional<std::array<double, 2>> slope_range;    // median convergence slope
};

struct SimulateSpec {
  double fk_time = 0.5;
  std::size_t ensemble_paths = 1000;  // paths stored for summaries and support diagnostics
  std::size_t summary_stride = 100;   // CSV row every this many steps (plus the last)
  std::vector<std::array<double, 2>> points{{0.0, 0.0}};  // (x, y) for the pointwise diagnostics
  double diagnostic_t = 0.5;
  double max_abs_z = 3.0;
  std::optional<double> max_diag_spread;
  std::optional<double> max_bracket_gap;
  std::optional<double> max_minimizer_residual;
};

/// One parsed and validated experiment.
struct Scenario {
  std::string id;
  std::string origin;       // file name or "<memory>"
  std::string config_hash;  // FNV-1a of the raw bytes
  std::uint64_t seed = 0;

  std::vector<double> lambdas;
  std::vector<FunctionSpec> fs;
  std::vector<FunctionSpec> h;  // exactly one element (FunctionSpec has no empty state)
  InstanceFlags flags;

  std::size_t b_samples = 4096;
  ClassifyOptions classify;
  std::optional<EqualityCase> expect;

  SimConfig sim;
  SimulateSpec simulate;
  PdeCheckSpec pde;

  const FunctionSpec& h_spec() const { return h.front(); }
  int m() const { return static_cast<int>(lambdas.size()); }
  AnyInstance instance() const;
  /// The two-function view; ConfigError (at "coefficients") unless m = 2.
  BorellInstance borell() const;
};

/// Parses and validates a scenario. Every error is a ConfigError anchored to a line of `text`.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<memory>");

/// Reads a file; unreadable files raise ConfigError at the root.
Scenario load_scenario(const std::string& path);

/// Echo of the instance part of a scenario (coefficients, flags, functions).
json instance_to_json(const Scenario& s);

}  // namespace ebl::scenario
