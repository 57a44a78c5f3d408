#pragma once

#include <compare>

namespace lasertune {

/// Thin strong type over a double carrying an SI unit tag.
template <class Tag>
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr explicit Quantity(double value) : value_(value) {}

  [[nodiscard]] constexpr double value() const { return value_; }

  constexpr auto operator<=>(const Quantity&) const = default;

  constexpr Quantity operator+(Quantity other) const { return Quantity(value_ + other.value_); }
  constexpr Quantity operator-(Quantity other) const { return Quantity(value_ - other.value_); }
  constexpr Quantity operator*(double k) const { return Quantity(value_ * k); }
  constexpr double operator/(Quantity other) const { return value_ / other.value_; }

 private:
  double value_ = 0.0;
};

using Ohms = Quantity<struct OhmsTag>;
using Hertz = Quantity<struct HertzTag>;
using Amperes = Quantity<struct AmperesTag>;

constexpr Hertz from_ghz(double ghz) { return Hertz(ghz * 1e9); }
constexpr Hertz from_mhz(double mhz) { return Hertz(mhz * 1e6); }
constexpr double to_ghz(Hertz f) { return f.value() * 1e-9; }
constexpr double to_mhz(Hertz f) { return f.value() * 1e-6; }
constexpr double to_na(Amperes i) { return i.value() * 1e9; }

}  // namespace lasertune
