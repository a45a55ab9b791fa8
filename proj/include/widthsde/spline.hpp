#pragma once

// Natural cubic spline through (x_i, y_i), with analytic first derivative.
// Used for tabulated radial profiles and for sampled control signals.

#include <Eigen/Dense>

namespace widthsde {

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(Eigen::ArrayXd x, Eigen::ArrayXd y);

  double operator()(double x) const;
  double derivative(double x) const;

  double x_min() const { return x_(0); }
  double x_max() const { return x_(x_.size() - 1); }
  bool empty() const { return x_.size() == 0; }

 private:
  Eigen::Index segment(double x) const;

  Eigen::ArrayXd x_, y_, m_;  // m_: second derivatives at knots
};

}  // namespace widthsde
