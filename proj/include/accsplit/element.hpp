#pragma once

#include <Eigen/Core>
#include <string>

namespace accsplit {

using Scalar = double;
using Index = Eigen::Index;

/// Shape descriptor of an Element. A length-n vector and an n x 1 matrix are
/// different shapes.
struct Shape {
  Index rows = 0;
  Index cols = 0;
  bool matrix = false;

  static Shape vector(Index n) { return {n, 1, false}; }
  static Shape dense(Index rows, Index cols) { return {rows, cols, true}; }

  Index size() const noexcept { return rows * cols; }
  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// A point of a finite-dimensional real inner-product space: either a flat
/// vector (Euclidean product) or a dense matrix (Frobenius product).
///
/// Every public operation leaves the stored scalars finite; an operation that
/// would produce NaN or Inf throws NumericalError instead.
class Element {
 public:
  Element() = default;

  static Element zeros(const Shape& shape);
  static Element zeros_like(const Element& x) { return zeros(x.shape()); }
  static Element vector(Eigen::VectorXd values);
  static Element matrix(Eigen::MatrixXd values);

  const Shape& shape() const noexcept { return shape_; }
  bool is_matrix() const noexcept { return shape_.matrix; }
  bool empty() const noexcept { return data_.size() == 0; }
  Index size() const noexcept { return data_.size(); }
  Index rows() const noexcept { return shape_.rows; }
  Index cols() const noexcept { return shape_.cols; }

  /// Dense view; vectors are stored as a single column.
  const Eigen::MatrixXd& mat() const noexcept { return data_; }
  Eigen::Map<const Eigen::VectorXd> flat() const noexcept {
    return {data_.data(), data_.size()};
  }
  Eigen::VectorXd to_vector() const { return flat(); }

  Scalar operator[](Index i) const { return data_.data()[i]; }

  Element& operator+=(const Element& other);
  Element& operator-=(const Element& other);
  Element& operator*=(Scalar a);

 private:
  Element(Shape shape, Eigen::MatrixXd data);

  Shape shape_;
  Eigen::MatrixXd data_;
};

/// Throws ShapeError unless x and y share one shape descriptor.
void require_same_shape(const Element& x, const Element& y, const char* where);

/// a*x + b*y.
Element combine(Scalar a, const Element& x, Scalar b, const Element& y);
Scalar inner(const Element& x, const Element& y);
Scalar norm(const Element& x);

Element operator+(const Element& x, const Element& y);
Element operator-(const Element& x, const Element& y);
Element operator-(const Element& x);
Element operator*(Scalar a, const Element& x);
Element operator*(const Element& x, Scalar a);

/// Wraps raw storage back into an Element of the given shape. Used by oracles
/// that compute with Eigen directly.
Element with_shape(const Shape& shape, Eigen::MatrixXd values);

}  // namespace accsplit
