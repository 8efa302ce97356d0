// Copyright 2026 The mdcauction Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mdcauction {

/// Exact decimal quantity stored as an integer count of milli-units.
///
/// Currency and resource amounts both use this representation so that budget
/// conservation and capacity checks are exact integer comparisons. The tag
/// parameter keeps money and resources from being mixed by accident.
template <typename Tag>
class FixedPoint {
 public:
  using raw_type = std::int64_t;
  static constexpr raw_type kScale = 1000;

  constexpr FixedPoint() = default;

  static constexpr FixedPoint from_raw(raw_type milli) { return FixedPoint(milli); }
  static constexpr FixedPoint units(std::int64_t whole) { return FixedPoint(whole * kScale); }
  static constexpr FixedPoint zero() { return FixedPoint(0); }
  static constexpr FixedPoint max() { return FixedPoint(std::numeric_limits<raw_type>::max()); }

  /// Rounds to the nearest milli-unit. Non-finite or out-of-range input throws.
  static FixedPoint from_double(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite fixed-point value");
    const double scaled = value * static_cast<double>(kScale);
    if (std::fabs(scaled) >= 9.0e18) throw std::out_of_range("fixed-point value out of range");
    return FixedPoint(static_cast<raw_type>(std::llround(scaled)));
  }

  constexpr raw_type raw() const { return milli_; }
  double to_double() const { return static_cast<double>(milli_) / static_cast<double>(kScale); }
  constexpr bool is_unbounded() const { return milli_ == std::numeric_limits<raw_type>::max(); }

  constexpr auto operator<=>(const FixedPoint&) const = default;

  constexpr FixedPoint operator+(FixedPoint other) const {
    if (is_unbounded() || other.is_unbounded()) return max();
    return FixedPoint(milli_ + other.milli_);
  }
  constexpr FixedPoint operator-(FixedPoint other) const {
    if (is_unbounded()) return max();
    return FixedPoint(milli_ - other.milli_);
  }
  constexpr FixedPoint& operator+=(FixedPoint other) { return *this = *this + other; }
  constexpr FixedPoint& operator-=(FixedPoint other) { return *this = *this - other; }

  /// Multiplies by an exact integer factor.
  constexpr FixedPoint scaled_by(std::int64_t factor) const { return FixedPoint(milli_ * factor); }

  /// Shortest exact decimal rendering: 26, 2.222, 3.5, inf.
  std::string to_string() const {
    if (is_unbounded()) return "inf";
    std::string out;
    raw_type v = milli_;
    if (v < 0) {
      out.push_back('-');
      v = -v;
    }
    out += std::to_string(v / kScale);
    raw_type frac = v % kScale;
    if (frac != 0) {
      std::string digits = std::to_string(frac);
      digits.insert(0, 3 - digits.size(), '0');
      while (digits.back() == '0') digits.pop_back();
      out += '.' + digits;
    }
    return out;
  }

 private:
  constexpr explicit FixedPoint(raw_type milli) : milli_(milli) {}
  raw_type milli_ = 0;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, FixedPoint<Tag> value) {
  return os << value.to_string();
}

struct MoneyTag {};
struct QuantityTag {};

using Money = FixedPoint<MoneyTag>;
using Quantity = FixedPoint<QuantityTag>;

}  // namespace mdcauction
