#include "accsplit/element.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "accsplit/errors.hpp"

namespace accsplit {

namespace {

void require_finite(const Eigen::MatrixXd& data, const char* where) {
  if (!data.allFinite()) {
    throw NumericalError(std::string(where) + ": result contains non-finite values");
  }
}

}  // namespace

std::string Shape::to_string() const {
  std::ostringstream os;
  if (matrix) {
    os << "matrix(" << rows << "x" << cols << ")";
  } else {
    os << "vector(" << rows << ")";
  }
  return os.str();
}

Element::Element(Shape shape, Eigen::MatrixXd data)
    : shape_(shape), data_(std::move(data)) {}

Element Element::zeros(const Shape& shape) {
  return Element(shape, Eigen::MatrixXd::Zero(shape.rows, shape.cols));
}

Element Element::vector(Eigen::VectorXd values) {
  require_finite(values, "Element::vector");
  const Index n = values.size();
  return Element(Shape::vector(n), std::move(values));
}

Element Element::matrix(Eigen::MatrixXd values) {
  require_finite(values, "Element::matrix");
  const Shape shape = Shape::dense(values.rows(), values.cols());
  return Element(shape, std::move(values));
}

Element with_shape(const Shape& shape, Eigen::MatrixXd values) {
  if (values.size() != shape.size()) {
    throw ShapeError("with_shape: " + std::to_string(values.size()) +
                     " values do not fit " + shape.to_string());
  }
  if (values.rows() != shape.rows) {
    Eigen::MatrixXd reshaped =
        Eigen::Map<const Eigen::MatrixXd>(values.data(), shape.rows, shape.cols);
    values = std::move(reshaped);
  }
  return shape.matrix ? Element::matrix(std::move(values))
                      : Element::vector(std::move(values));
}

void require_same_shape(const Element& x, const Element& y, const char* where) {
  if (!(x.shape() == y.shape())) {
    throw ShapeError(std::string(where) + ": shape mismatch " +
                     x.shape().to_string() + " vs " + y.shape().to_string());
  }
}

Element& Element::operator+=(const Element& other) {
  require_same_shape(*this, other, "operator+=");
  data_ += other.data_;
  require_finite(data_, "operator+=");
  return *this;
}

Element& Element::operator-=(const Element& other) {
  require_same_shape(*this, other, "operator-=");
  data_ -= other.data_;
  require_finite(data_, "operator-=");
  return *this;
}

Element& Element::operator*=(Scalar a) {
  data_ *= a;
  require_finite(data_, "operator*=");
  return *this;
}

Element combine(Scalar a, const Element& x, Scalar b, const Element& y) {
  require_same_shape(x, y, "combine");
  Eigen::MatrixXd out = a * x.mat() + b * y.mat();
  require_finite(out, "combine");
  return with_shape(x.shape(), std::move(out));
}

Scalar inner(const Element& x, const Element& y) {
  require_same_shape(x, y, "inner");
  return x.flat().dot(y.flat());
}

Scalar norm(const Element& x) { return x.flat().norm(); }

Element operator+(const Element& x, const Element& y) {
  Element out = x;
  out += y;
  return out;
}

Element operator-(const Element& x, const Element& y) {
  Element out = x;
  out -= y;
  return out;
}

Element operator-(const Element& x) {
  Element out = x;
  out *= -1.0;
  return out;
}

Element operator*(Scalar a, const Element& x) {
  Element out = x;
  out *= a;
  return out;
}

Element operator*(const Element& x, Scalar a) { return a * x; }

}  // namespace accsplit
