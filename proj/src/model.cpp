#include "widthsde/model.hpp"

#include <cmath>

namespace widthsde::model {

TransformedState to_transformed(const HalfPlaneState& s) {
  if (!(s.x > 0.0)) throw NonpositiveWidth("to_transformed: x must be > 0");
  return {1.0 / s.x, s.x * s.x * s.y};
}

HalfPlaneState from_transformed(const TransformedState& t) {
  if (!(t.xi > 0.0)) throw NonpositiveXi("from_transformed: xi must be > 0");
  return {1.0 / t.xi, t.xi * t.xi * t.eta};
}

Eigen::Matrix2d g1_jacobian(const HalfPlaneState& s) {
  if (!(s.x > 0.0)) throw NonpositiveWidth("g1_jacobian: x must be > 0");
  Eigen::Matrix2d j;
  j << -1.0 / (s.x * s.x), 0.0,  //
      2.0 * s.x * s.y, s.x * s.x;
  return j;
}

Eigen::Vector2d drift_original(const HalfPlaneState& s, const SdeParamsRef& p) {
  if (!(s.x > 0.0)) throw NonpositiveWidth("drift_original: x must be > 0");
  const double x3 = s.x * s.x * s.x;
  const double x4 = x3 * s.x;
  return {s.y, p.delta / x3 - p.gamma * s.y / x4};
}

Eigen::Vector2d diffusion_original(const HalfPlaneState& s,
                                   const SdeParamsRef& p) {
  if (!(s.x > 0.0))
    throw NonpositiveWidth("diffusion_original: x must be > 0");
  return {0.0, std::sqrt(2.0 * p.d) / (s.x * s.x)};
}

Eigen::Vector2d drift_transformed(const TransformedState& t,
                                  const SdeParamsRef& p) {
  const double xi3 = t.xi * t.xi * t.xi;
  const double xi4 = xi3 * t.xi;
  return {-xi4 * t.eta,
          p.delta * t.xi + 2.0 * xi3 * t.eta * t.eta - p.gamma * xi4 * t.eta};
}

Eigen::Vector2d diffusion_transformed(const SdeParamsRef& p) {
  return {0.0, std::sqrt(2.0 * p.d)};
}

double lyapunov(const TransformedState& t) {
  const double xi2 = t.xi * t.xi;
  return 0.5 * xi2 * xi2 * t.eta * t.eta;
}

double generator_lyapunov(const TransformedState& t, const SdeParamsRef& p) {
  const double xi = t.xi;
  const double xi4 = xi * xi * xi * xi;
  const double xi5 = xi4 * xi;
  const double xi8 = xi4 * xi4;
  return p.delta * xi5 * t.eta - p.gamma * xi8 * t.eta * t.eta + p.d * xi4;
}

double generator_lyapunov_linear_first_term(const TransformedState& t,
                                            const SdeParamsRef& p) {
  const double xi = t.xi;
  const double xi4 = xi * xi * xi * xi;
  const double xi8 = xi4 * xi4;
  return p.delta * xi * t.eta - p.gamma * xi8 * t.eta * t.eta + p.d * xi4;
}

VectorField2 bracket(const TransformedState& t, const SdeParamsRef& p) {
  const double xi3 = t.xi * t.xi * t.xi;
  const double xi4 = xi3 * t.xi;
  return {xi4, -(4.0 * xi3 * t.eta - p.gamma * xi4)};
}

int hormander_rank(const TransformedState& t, const SdeParamsRef& p,
                   double tol) {
  (void)p;
  const double xi2 = t.xi * t.xi;
  const double det = xi2 * xi2;  // |det [X1, [X0,X1]]|
  return det > tol ? 2 : 1;
}

}  // namespace widthsde::model
