#pragma once

#include <span>
#include <variant>
#include <vector>

#include "ebl/function_spec.hpp"

namespace ebl {

/// {x : <a,x> + b >= 0}
struct HalfspaceSet {
  Vector a;
  double b = 0.0;
  friend bool operator==(const HalfspaceSet&, const HalfspaceSet&) = default;
};

/// Finite union of disjoint closed intervals on the line; empty means the empty set.
struct IntervalUnion {
  std::vector<ClosedInterval> intervals;
  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;
};

struct BoxSet {
  Box box;
  friend bool operator==(const BoxSet&, const BoxSet&) = default;
};

using GaussianSet = std::variant<HalfspaceSet, IntervalUnion, BoxSet>;

int set_dim(const GaussianSet& s);
bool contains(const GaussianSet& s, std::span<const double> x);

/// Sorts and merges overlapping or touching intervals; drops empty ones.
IntervalUnion normalized(std::vector<ClosedInterval> intervals);

/// Scaled Minkowski sum sum_i lambda_i * S_i. All sets must share variant and
/// dimension; halfspaces must have parallel normals (UnsupportedError otherwise).
GaussianSet minkowski_combine(std::span<const GaussianSet> sets, std::span<const double> lambdas);

/// Pointwise indicator 1_S.
FunctionSpec set_to_indicator(const GaussianSet& s);

}  // namespace ebl
