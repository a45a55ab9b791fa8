#include "widthsde/spline.hpp"

#include <algorithm>

#include "widthsde/errors.hpp"

namespace widthsde {

CubicSpline::CubicSpline(Eigen::ArrayXd x, Eigen::ArrayXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  const Eigen::Index n = x_.size();
  if (n < 3 || y_.size() != n)
    throw ConfigError("CubicSpline: need >= 3 matching knots");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(x_(i) > x_(i - 1)))
      throw ConfigError("CubicSpline: knots must be strictly increasing");

  // Thomas solve of the natural-spline tridiagonal system for the second
  // derivatives.
  m_ = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd c = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd dd = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h0 = x_(i) - x_(i - 1);
    const double h1 = x_(i + 1) - x_(i);
    const double rhs =
        6.0 * ((y_(i + 1) - y_(i)) / h1 - (y_(i) - y_(i - 1)) / h0);
    const double diag = 2.0 * (h0 + h1) - h0 * c(i - 1);
    c(i) = h1 / diag;
    dd(i) = (rhs - h0 * dd(i - 1)) / diag;
  }
  for (Eigen::Index i = n - 2; i >= 1; --i) m_(i) = dd(i) - c(i) * m_(i + 1);
}

Eigen::Index CubicSpline::segment(double x) const {
  const Eigen::Index n = x_.size();
  if (x <= x_(0)) return 0;
  if (x >= x_(n - 1)) return n - 2;
  const double* begin = x_.data();
  const double* it = std::upper_bound(begin, begin + n, x);
  return static_cast<Eigen::Index>(it - begin) - 1;
}

double CubicSpline::operator()(double x) const {
  const Eigen::Index i = segment(x);
  const double h = x_(i + 1) - x_(i);
  const double a = (x_(i + 1) - x) / h;
  const double b = (x - x_(i)) / h;
  return a * y_(i) + b * y_(i + 1) +
         ((a * a * a - a) * m_(i) + (b * b * b - b) * m_(i + 1)) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
  const Eigen::Index i = segment(x);
  const double h = x_(i + 1) - x_(i);
  const double a = (x_(i + 1) - x) / h;
  const double b = (x - x_(i)) / h;
  return (y_(i + 1) - y_(i)) / h +
         ((3.0 * b * b - 1.0) * m_(i + 1) - (3.0 * a * a - 1.0) * m_(i)) * h /
             6.0;
}

}  // namespace widthsde
