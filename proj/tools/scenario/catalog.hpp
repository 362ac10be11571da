#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "runners.hpp"

namespace ebl::scenario {

/// One fixture: an instance together with the verdict it must receive.
struct CatalogEntry {
  std::string id;      // e.g. "h1-07", "strict-S1", "control-h1-shift"
  std::string family;  // generating family label, or "strict"
  EqualityCase expected = EqualityCase::unclassified;
  bool grid = false;   // quantile grid involved (looser deficit tolerance)
  AnyInstance instance;
};

struct CatalogResult {
  CatalogEntry entry;
  Regime regime = Regime::nondegenerate;
  ExtendedReal deficit = ExtendedReal(0.0);
  EqualityVerdict verdict;
  ExtendedReal b_violation = ExtendedReal(0.0);
  bool pass = false;
};

/// Number of random parameterizations per equality family.
inline constexpr int kCatalogRowsPerFamily = 20;
/// Deficit a strict fixture must exceed.
inline constexpr double kStrictDeficitMin = 1e-3;

/// 20 random parameterizations of each equality family (n = 1 + i % 3,
/// m = 2 + (i / 3) % 2), drawn from counter streams under `seed`.
std::vector<CatalogEntry> equality_fixtures(std::uint64_t seed);
/// Ten instances outside the taxonomy; S1 is f = g = 1[-1,1], lambda = mu = 0.7.
std::vector<CatalogEntry> strict_fixtures();
/// An H1 row whose h offset is shifted by +0.1; must be reported strict.
CatalogEntry negative_control();

/// Equality rows pass on matching verdict, |deficit| <= tolerance and a
/// sampled (B) violation no worse than -1e-10. Strict rows pass on matching
/// verdict and deficit > kStrictDeficitMin.
CatalogResult evaluate(const CatalogEntry& entry, std::size_t b_samples, std::uint64_t seed,
                       std::optional<double> deficit_tol = std::nullopt);

/// Runs every row whose id or family contains `filter` (all rows when unset)
/// on the worker pool. An explicit filter matching nothing is a ConfigError.
Report run_catalog(const RunOptions& options, const std::optional<std::string>& filter = std::nullopt);

}  // namespace ebl::scenario
