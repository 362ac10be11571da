#pragma once

#include <cmath>
#include <compare>
#include <iosfwd>
#include <limits>
#include <string>

namespace ebl {

/// A value in R u {-inf, +inf}.
///
/// Addition follows the convention inf - inf = -inf + inf = -inf, so the
/// result is never NaN. Scaling by a positive factor keeps the sign of an
/// infinite value. The order is total with -inf < r < +inf.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(sanitize(v)) {}  // NOLINT: implicit by design of the arithmetic

  static constexpr ExtendedReal plus_infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtendedReal minus_infinity() {
    return ExtendedReal(-std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return value_; }
  bool is_finite() const { return std::isfinite(value_); }
  bool is_plus_infinity() const { return value_ == std::numeric_limits<double>::infinity(); }
  bool is_minus_infinity() const { return value_ == -std::numeric_limits<double>::infinity(); }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if ((a.is_plus_infinity() && b.is_minus_infinity()) ||
        (a.is_minus_infinity() && b.is_plus_infinity())) {
      return minus_infinity();
    }
    return ExtendedReal(a.value_ + b.value_);
  }
  friend ExtendedReal operator-(ExtendedReal a) { return ExtendedReal(-a.value_); }
  friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b) { return a + (-b); }
  ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }
  ExtendedReal& operator-=(ExtendedReal other) { return *this = *this - other; }

  /// Positive scalar multiple. A zero or negative factor is a caller error
  /// and yields the finite product (0 * inf is mapped to 0).
  friend ExtendedReal scale(double factor, ExtendedReal a) {
    if (!a.is_finite() && factor == 0.0) return ExtendedReal(0.0);
    return ExtendedReal(factor * a.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }
  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) {
    return a.value_ < b.value_ ? std::strong_ordering::less
           : a.value_ > b.value_ ? std::strong_ordering::greater
                                 : std::strong_ordering::equal;
  }

  std::string to_string() const;

 private:
  static constexpr double sanitize(double v) {
    // NaN has no meaning here; it only arises from upstream bugs.
    return v != v ? -std::numeric_limits<double>::infinity() : v;
  }

  double value_ = 0.0;
};

/// Left side minus right side of an inequality lhs >= rhs.
///
/// Equal infinities count as a tight inequality (gap 0); every other
/// combination uses the convention of ExtendedReal subtraction.
ExtendedReal inequality_gap(ExtendedReal lhs, ExtendedReal rhs);

std::ostream& operator<<(std::ostream& os, ExtendedReal x);

}  // namespace ebl
