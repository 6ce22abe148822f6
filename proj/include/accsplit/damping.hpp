#pragma once

#include <cstdint>
#include <string>

#include "accsplit/element.hpp"

namespace accsplit {

/// Momentum schedule gamma_k used to form x_hat_k = x_k + gamma_k (x_k - x_{k-1}).
///
///   None             gamma = 0 (plain gradient-flow discretization)
///   Decaying(r)      gamma = k / (k + r),     damping eta(t) = r / t, r >= 3
///   Constant(r)      gamma = 1 - r h,         damping eta(t) = r,     r > 0
///   Combined(r1, r2) gamma = k/(k+r1) - r2 h, damping eta(t) = r1/t + r2
///
/// Parameters are validated when the schedule is built.
class DampingSchedule {
 public:
  enum class Kind { None, Decaying, Constant, Combined };

  DampingSchedule() = default;

  static DampingSchedule none() { return {}; }
  static DampingSchedule decaying(Scalar r);
  static DampingSchedule constant(Scalar r);
  static DampingSchedule combined(Scalar r1, Scalar r2);

  Kind kind() const noexcept { return kind_; }
  bool accelerated() const noexcept { return kind_ != Kind::None; }

  /// r for Decaying/Constant, r1 for Combined.
  Scalar r() const noexcept { return r1_; }
  Scalar r1() const noexcept { return r1_; }
  Scalar r2() const noexcept { return r2_; }

  /// The continuous damping coefficient eta(t) this schedule discretizes.
  Scalar eta(Scalar t) const;

  std::string describe() const;

 private:
  DampingSchedule(Kind kind, Scalar r1, Scalar r2) : kind_(kind), r1_(r1), r2_(r2) {}

  Kind kind_ = Kind::None;
  Scalar r1_ = 0.0;
  Scalar r2_ = 0.0;
};

/// Momentum coefficient for iteration k and step h. Constant and Combined
/// results are floored at 0 (see constant_damping_clamped).
Scalar gamma(const DampingSchedule& s, std::int64_t k, Scalar h);

/// True when Constant(r) with r h >= 1, where gamma is clamped to 0.
bool constant_damping_clamped(const DampingSchedule& s, Scalar h);

/// x_k + gamma (x_k - x_prev).
Element extrapolate(const Element& x_k, const Element& x_prev, Scalar gamma);

}  // namespace accsplit
