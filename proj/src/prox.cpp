#include "accsplit/prox.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <utility>

#include "accsplit/detail/svd.hpp"
#include "accsplit/errors.hpp"

namespace accsplit {

namespace {

void require_positive_lambda(Scalar lambda, const std::string& who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(who + ": resolvent parameter must be positive, got " +
                         std::to_string(lambda));
  }
}

Eigen::VectorXd as_column(const Element& x) { return x.to_vector(); }

}  // namespace

ProxOracle::ProxOracle(std::string name, Resolvent resolvent, Value value,
                       Gradient gradient)
    : name_(std::move(name)),
      resolvent_(std::move(resolvent)),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {}

Element ProxOracle::operator()(const Element& v, Scalar lambda) const {
  require_positive_lambda(lambda, name_);
  return resolvent_(v, lambda);
}

Scalar ProxOracle::value(const Element& x) const {
  if (!value_) throw ConfigurationError(name_ + ": no value procedure");
  return value_(x);
}

Element ProxOracle::gradient(const Element& x) const {
  if (!gradient_) throw ConfigurationError(name_ + ": term is not smooth");
  return gradient_(x);
}

GradOracle::GradOracle(std::string name, Gradient gradient, Value value,
                       std::optional<Scalar> lipschitz)
    : name_(std::move(name)),
      gradient_(std::move(gradient)),
      value_(std::move(value)),
      lipschitz_(lipschitz) {
  if (lipschitz_ && !(*lipschitz_ >= 0.0)) {
    throw ParameterError(name_ + ": Lipschitz estimate must be nonnegative");
  }
}

// ---------------------------------------------------------------------------

Element prox_l1(const Element& v, Scalar tau) {
  if (!(tau >= 0.0)) throw ParameterError("prox_l1: tau must be >= 0");
  Eigen::MatrixXd out = v.mat().unaryExpr([tau](double vi) {
    const double mag = std::abs(vi) - tau;
    return mag > 0.0 ? std::copysign(mag, vi) : 0.0;
  });
  return with_shape(v.shape(), std::move(out));
}

Element prox_least_squares(const Element& v, Scalar lambda, const Eigen::MatrixXd& A,
                           const Element& b) {
  require_positive_lambda(lambda, "prox_least_squares");
  if (A.cols() != v.size() || A.rows() != b.size()) {
    throw ShapeError("prox_least_squares: A is " + std::to_string(A.rows()) + "x" +
                     std::to_string(A.cols()) + ", v has " + std::to_string(v.size()) +
                     " entries, b has " + std::to_string(b.size()));
  }
  const Index n = A.cols();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  system.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose(), lambda);
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("prox_least_squares: Cholesky factorization failed");
  }
  Eigen::VectorXd rhs = as_column(v) + lambda * (A.transpose() * as_column(b));
  return with_shape(v.shape(), llt.solve(rhs));
}

Element project_box(const Element& X, Scalar a, Scalar b) {
  if (!(a <= b)) throw ParameterError("project_box: lower bound exceeds upper bound");
  Eigen::MatrixXd out = X.mat().cwiseMax(a).cwiseMin(b);
  return with_shape(X.shape(), std::move(out));
}

Element prox_nuclear(const Element& X, Scalar tau) {
  if (!(tau >= 0.0)) throw ParameterError("prox_nuclear: tau must be >= 0");
  if (tau == 0.0) return X;
  const detail::ThinSvd svd = detail::thin_svd(X.mat());
  const Eigen::VectorXd shrunk = (svd.S.array() - tau).cwiseMax(0.0);
  Index rank = 0;
  while (rank < shrunk.size() && shrunk(rank) > 0.0) ++rank;
  Eigen::MatrixXd out;
  if (rank == 0) {
    out = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  } else {
    out = svd.U.leftCols(rank) * shrunk.head(rank).asDiagonal() *
          svd.V.leftCols(rank).transpose();
  }
  return with_shape(X.shape(), std::move(out));
}

Element cayley(const ProxOracle& J, Scalar lambda, const Element& x) {
  return combine(2.0, J(x, lambda), -1.0, x);
}

Scalar grad_check(const GradOracle& w, const Element& x) {
  constexpr Scalar step = 1e-6;
  const Element g = w.gradient(x);
  require_same_shape(g, x, "grad_check");
  Eigen::MatrixXd probe = x.mat();
  Scalar worst = 0.0;
  for (Index i = 0; i < probe.size(); ++i) {
    const Scalar saved = probe.data()[i];
    probe.data()[i] = saved + step;
    const Scalar up = w.value(with_shape(x.shape(), probe));
    probe.data()[i] = saved - step;
    const Scalar down = w.value(with_shape(x.shape(), probe));
    probe.data()[i] = saved;
    const Scalar fd = (up - down) / (2.0 * step);
    const Scalar scale = std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(g[i] - fd) / scale);
  }
  return worst;
}

Scalar largest_eigenvalue_ata(const Eigen::MatrixXd& A, int max_iters, Scalar rel_tol) {
  if (A.size() == 0) return 0.0;
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(A.cols(), 1.0, 2.0);
  u.normalize();
  Scalar estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = A.transpose() * (A * u);
    const Scalar value = next.norm();
    if (value == 0.0) return 0.0;
    u = next / value;
    if (std::abs(value - estimate) <= rel_tol * value) return value;
    estimate = value;
  }
  return estimate;
}

// ---------------------------------------------------------------------------

ProxOracle identity_oracle() {
  return ProxOracle(
      "zero", [](const Element& v, Scalar) { return v; },
      [](const Element&) { return 0.0; },
      [](const Element& x) { return Element::zeros_like(x); });
}

ProxOracle l1_oracle(Scalar alpha) {
  if (!(alpha >= 0.0)) throw ParameterError("l1_oracle: alpha must be >= 0");
  return ProxOracle(
      "l1", [alpha](const Element& v, Scalar lambda) { return prox_l1(v, lambda * alpha); },
      [alpha](const Element& x) { return alpha * x.flat().lpNorm<1>(); });
}

namespace {

struct LeastSquaresData {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd AtA;
  Eigen::VectorXd Atb;

  struct Factor {
    Scalar lambda;
    Eigen::LLT<Eigen::MatrixXd> llt;
  };
  mutable std::mutex mutex;
  mutable std::shared_ptr<const Factor> factor;

  std::shared_ptr<const Factor> factor_for(Scalar lambda) const {
    std::lock_guard<std::mutex> lock(mutex);
    if (!factor || factor->lambda != lambda) {
      const Index n = AtA.rows();
      Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) + lambda * AtA;
      auto fresh = std::make_shared<Factor>(Factor{lambda, Eigen::LLT<Eigen::MatrixXd>(system)});
      if (fresh->llt.info() != Eigen::Success) {
        throw NumericalError("least_squares_oracle: Cholesky factorization failed");
      }
      factor = std::move(fresh);
    }
    return factor;
  }
};

}  // namespace

ProxOracle least_squares_oracle(Eigen::MatrixXd A, Eigen::VectorXd b) {
  if (A.rows() != b.size()) throw ShapeError("least_squares_oracle: rows(A) != size(b)");
  auto data = std::make_shared<LeastSquaresData>();
  data->AtA = A.transpose() * A;
  data->Atb = A.transpose() * b;
  data->A = std::move(A);
  data->b = std::move(b);
  return ProxOracle(
      "least_squares",
      [data](const Element& v, Scalar lambda) {
        if (v.size() != data->A.cols()) {
          throw ShapeError("least_squares_oracle: argument has " + std::to_string(v.size()) +
                           " entries, expected " + std::to_string(data->A.cols()));
        }
        const auto factor = data->factor_for(lambda);
        Eigen::VectorXd rhs = v.to_vector() + lambda * data->Atb;
        return with_shape(v.shape(), factor->llt.solve(rhs));
      },
      [data](const Element& x) {
        return 0.5 * (data->A * x.flat() - data->b).squaredNorm();
      },
      [data](const Element& x) {
        return with_shape(x.shape(), data->AtA * x.flat() - data->Atb);
      });
}

ProxOracle box_oracle(Scalar a, Scalar b) {
  if (!(a <= b)) throw ParameterError("box_oracle: lower bound exceeds upper bound");
  return ProxOracle(
      "box", [a, b](const Element& v, Scalar) { return project_box(v, a, b); },
      [a, b](const Element& x) {
        const bool inside = (x.mat().array() >= a).all() && (x.mat().array() <= b).all();
        return inside ? 0.0 : std::numeric_limits<Scalar>::infinity();
      });
}

ProxOracle nuclear_oracle(Scalar alpha) {
  if (!(alpha >= 0.0)) throw ParameterError("nuclear_oracle: alpha must be >= 0");
  return ProxOracle(
      "nuclear",
      [alpha](const Element& v, Scalar lambda) { return prox_nuclear(v, lambda * alpha); },
      [alpha](const Element& x) {
        return alpha * detail::singular_values(x.mat()).sum();
      });
}

ProxOracle quadratic_oracle(Eigen::MatrixXd Q, Eigen::VectorXd q) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size()) {
    throw ShapeError("quadratic_oracle: Q must be square and match q");
  }
  auto Qp = std::make_shared<const Eigen::MatrixXd>(std::move(Q));
  auto qp = std::make_shared<const Eigen::VectorXd>(std::move(q));
  return ProxOracle(
      "quadratic",
      [Qp, qp](const Element& v, Scalar lambda) {
        const Index n = Qp->rows();
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) + lambda * (*Qp);
        Eigen::LLT<Eigen::MatrixXd> llt(system);
        if (llt.info() != Eigen::Success) {
          throw NumericalError("quadratic_oracle: Cholesky factorization failed");
        }
        Eigen::VectorXd rhs = v.to_vector() + lambda * (*qp);
        return with_shape(v.shape(), llt.solve(rhs));
      },
      [Qp, qp](const Element& x) {
        const auto xv = x.flat();
        return 0.5 * xv.dot(*Qp * xv) - qp->dot(xv);
      },
      [Qp, qp](const Element& x) { return with_shape(x.shape(), *Qp * x.flat() - *qp); });
}

ProxOracle huber_l1_oracle(Scalar alpha, Scalar delta) {
  if (!(alpha >= 0.0)) throw ParameterError("huber_l1_oracle: alpha must be >= 0");
  if (!(delta > 0.0)) throw ParameterError("huber_l1_oracle: delta must be > 0");
  return ProxOracle(
      "huber_l1",
      [alpha, delta](const Element& v, Scalar lambda) {
        const Scalar t = lambda * alpha;
        Eigen::MatrixXd out = v.mat().unaryExpr([t, delta](double vi) {
          if (std::abs(vi) <= delta + t) return vi * delta / (delta + t);
          return vi - std::copysign(t, vi);
        });
        return with_shape(v.shape(), std::move(out));
      },
      [alpha, delta](const Element& x) {
        const Scalar total = x.mat()
                                 .unaryExpr([delta](double xi) {
                                   const double a = std::abs(xi);
                                   return a <= delta ? xi * xi / (2.0 * delta) : a - 0.5 * delta;
                                 })
                                 .sum();
        return alpha * total;
      },
      [alpha, delta](const Element& x) {
        Eigen::MatrixXd g = (x.mat() / delta).cwiseMax(-1.0).cwiseMin(1.0) * alpha;
        return with_shape(x.shape(), std::move(g));
      });
}

GradOracle least_squares_grad(Eigen::MatrixXd A, Eigen::VectorXd b) {
  if (A.rows() != b.size()) throw ShapeError("least_squares_grad: rows(A) != size(b)");
  const Scalar L = largest_eigenvalue_ata(A);
  auto Ap = std::make_shared<const Eigen::MatrixXd>(std::move(A));
  auto bp = std::make_shared<const Eigen::VectorXd>(std::move(b));
  return GradOracle(
      "least_squares",
      [Ap, bp](const Element& x) {
        return with_shape(x.shape(), Ap->transpose() * (*Ap * x.flat() - *bp));
      },
      [Ap, bp](const Element& x) { return 0.5 * (*Ap * x.flat() - *bp).squaredNorm(); }, L);
}

GradOracle quadratic_grad(Eigen::MatrixXd Q, Eigen::VectorXd q) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size()) {
    throw ShapeError("quadratic_grad: Q must be square and match q");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
  const Scalar L = std::max(0.0, eig.eigenvalues().maxCoeff());
  auto Qp = std::make_shared<const Eigen::MatrixXd>(std::move(Q));
  auto qp = std::make_shared<const Eigen::VectorXd>(std::move(q));
  return GradOracle(
      "quadratic",
      [Qp, qp](const Element& x) { return with_shape(x.shape(), *Qp * x.flat() - *qp); },
      [Qp, qp](const Element& x) {
        const auto xv = x.flat();
        return 0.5 * xv.dot(*Qp * xv) - qp->dot(xv);
      },
      L);
}

GradOracle affine_grad(Element c, Scalar offset) {
  auto cp = std::make_shared<const Element>(std::move(c));
  return GradOracle(
      "affine", [cp](const Element& x) {
        require_same_shape(x, *cp, "affine_grad");
        return *cp;
      },
      [cp, offset](const Element& x) { return inner(*cp, x) + offset; }, 0.0);
}

}  // namespace accsplit
