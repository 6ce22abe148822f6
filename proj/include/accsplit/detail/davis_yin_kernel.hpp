#pragma once

#include "accsplit/element.hpp"

namespace accsplit::detail {

struct DavisYinPoints {
  Element quarter;        // J_f(x_hat)
  Element half;           // 2 quarter - x_hat
  Element three_quarter;  // J_g(half - lambda grad_w(quarter))
  Element next;           // x_hat + three_quarter - quarter
};

// Shared by the gradient-oracle step and the Yosida-regularized operator step
// so the two agree bit for bit when the regularization vanishes. `grad_w` is
// only invoked when has_w is set.
template <class JF, class JG, class GW>
DavisYinPoints davis_yin_points(const Element& x_hat, Scalar lambda, JF&& j_f, JG&& j_g,
                                GW&& grad_w, bool has_w) {
  DavisYinPoints out;
  out.quarter = j_f(x_hat);
  out.half = combine(2.0, out.quarter, -1.0, x_hat);
  if (has_w) {
    out.three_quarter = j_g(out.half - lambda * grad_w(out.quarter));
  } else {
    out.three_quarter = j_g(out.half);
  }
  // Grouped so that an identity J_f gives three_quarter exactly.
  out.next = out.three_quarter - (out.quarter - x_hat);
  return out;
}

}  // namespace accsplit::detail
