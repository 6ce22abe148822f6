#include "accsplit/damping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accsplit/errors.hpp"

namespace accsplit {

DampingSchedule DampingSchedule::decaying(Scalar r) {
  if (!(r >= 3.0) || !std::isfinite(r)) {
    throw ParameterError("decaying damping requires r >= 3, got " + std::to_string(r));
  }
  return {Kind::Decaying, r, 0.0};
}

DampingSchedule DampingSchedule::constant(Scalar r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ParameterError("constant damping requires r > 0, got " + std::to_string(r));
  }
  return {Kind::Constant, r, 0.0};
}

DampingSchedule DampingSchedule::combined(Scalar r1, Scalar r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !std::isfinite(r1) || !std::isfinite(r2)) {
    throw ParameterError("combined damping requires r1 > 0 and r2 > 0");
  }
  return {Kind::Combined, r1, r2};
}

Scalar DampingSchedule::eta(Scalar t) const {
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::Decaying:
      return r1_ / t;
    case Kind::Constant:
      return r1_;
    case Kind::Combined:
      return r1_ / t + r2_;
  }
  return 0.0;
}

std::string DampingSchedule::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::None:
      os << "none";
      break;
    case Kind::Decaying:
      os << "decaying(r=" << r1_ << ")";
      break;
    case Kind::Constant:
      os << "constant(r=" << r1_ << ")";
      break;
    case Kind::Combined:
      os << "combined(r1=" << r1_ << ",r2=" << r2_ << ")";
      break;
  }
  return os.str();
}

Scalar gamma(const DampingSchedule& s, std::int64_t k, Scalar h) {
  const auto kk = static_cast<Scalar>(k);
  switch (s.kind()) {
    case DampingSchedule::Kind::None:
      return 0.0;
    case DampingSchedule::Kind::Decaying:
      return kk / (kk + s.r());
    case DampingSchedule::Kind::Constant:
      return std::max(0.0, 1.0 - s.r() * h);
    case DampingSchedule::Kind::Combined:
      return std::max(0.0, kk / (kk + s.r1()) - s.r2() * h);
  }
  return 0.0;
}

bool constant_damping_clamped(const DampingSchedule& s, Scalar h) {
  return s.kind() == DampingSchedule::Kind::Constant && s.r() * h >= 1.0;
}

Element extrapolate(const Element& x_k, const Element& x_prev, Scalar gamma) {
  require_same_shape(x_k, x_prev, "extrapolate");
  if (gamma == 0.0) return x_k;
  return combine(1.0, x_k, gamma, x_k - x_prev);
}

}  // namespace accsplit
