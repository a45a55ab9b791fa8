#pragma once

// Radial profile f of the trial wave function, its moment integrals
//
//   c_f^{m,n,p} = 2 pi Int_0^inf r^m f(r)^n f'(r)^p dr,
//
// and the coefficients (delta, gamma, D, amp) of the width dynamics derived
// from them together with the physical inputs (Lambda, D_r, L2 mass).

#include <array>
#include <complex>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "widthsde/model.hpp"

namespace widthsde::profile {

struct ProfileSpec {
  std::function<double(double)> f;        // smooth, rapidly decreasing, >= 0
  std::function<double(double)> f_prime;  // empty: central differences
  double r_max = 12.0;                    // truncation radius
  int quad_n = 512;                       // quadrature nodes, >= 16

  // Derivative, falling back to central differences with step
  // 1e-6 * max(1, r) when no analytic derivative is supplied.
  double df(double r) const;

  // Throws ConfigError when the admissibility conditions fail: f >= 0 on
  // samples, |f(r_max)| and |f'(r_max)| below 1e-12, quad_n >= 16.
  void validate() const;

  static ProfileSpec gaussian();  // f(r) = exp(-r^2/2)
  static ProfileSpec sech2();     // f(r) = sech(r)^2
  static ProfileSpec named(const std::string& name);
  // Two-column samples (r, f(r)) interpolated by a natural cubic spline.
  static ProfileSpec from_samples(const Eigen::ArrayXd& r,
                                  const Eigen::ArrayXd& fr);
  static ProfileSpec from_csv(const std::string& path);
};

struct ShapeCoefficients {
  double c120 = 0.0;  // c_f^{1,2,0}
  double c320 = 0.0;  // c_f^{3,2,0}
  double c102 = 0.0;  // c_f^{1,0,2}
  double c140 = 0.0;  // c_f^{1,4,0}
  double c322 = 0.0;  // c_f^{3,2,2}
  std::array<double, 5> error_estimate{};  // same order as above
};

struct PhysicalInputs {
  double lambda = 1.0;  // damping Lambda > 0
  double d_r = 1.0;     // noise strength D_r > 0
  double mass = 1.0;    // initial L2 norm M > 0
};

struct SdeParams {
  double delta = 0.0;
  double gamma = 1.0;  // > 0
  double d = 1.0;      // > 0
  double amp = 1.0;    // the amplitude constant, > 0
};

inline model::SdeParamsRef to_ref(const SdeParams& p) {
  return {p.delta, p.gamma, p.d};
}

// Moment integrals by composite Gauss-Legendre over [0, r_max], with the
// difference against a doubled-node rule reported as the error estimate.
// Throws NonpositiveDivisorCoefficient when c120 or c320 is not safely
// positive (divisor tolerance 1e-14).
ShapeCoefficients shape_coefficients(const ProfileSpec& profile);

// delta = (4/c320) (c102 - M^2 c140 / (2 c120))
// gamma = 8 Lambda M^2 c322 / (c120 c320)
// d     = 32 pi^2 D_r c322 / c320^2
// amp   = M / sqrt(c120)
SdeParams derive_params(const ShapeCoefficients& coeffs,
                        const PhysicalInputs& phys);

// (amp/x) f(|u|/x) exp(i xdot |u|^2 / (4x)), evaluated at |u| = u_norm.
std::complex<double> trial_wave(const ProfileSpec& profile, double amp,
                                double x, double xdot, double u_norm);

// 2 pi amp^2 Int r f(r)^2 dr = amp^2 c120; independent of (x, xdot).
double l2_mass(const ProfileSpec& profile, double amp);

// Composite Gauss-Legendre quadrature over [a, b] with >= n nodes, exposed
// for reuse in tests and mass checks.
double gauss_legendre(const std::function<double(double)>& fn, double a,
                      double b, int n);

}  // namespace widthsde::profile
