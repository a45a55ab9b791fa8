#pragma once

// State types and closed-form vector fields of the width dynamics in both
// coordinate systems:
//
//   half-plane (x, y), x > 0:    dx = y dt
//                                dy = (delta/x^3 - gamma*y/x^4) dt
//                                     + sqrt(2D)/x^2 dW
//
//   transformed (xi, eta) = (1/x, x^2 y):
//                                dxi  = -xi^4 eta dt
//                                deta = (delta*xi + 2 xi^3 eta^2
//                                        - gamma*xi^4 eta) dt + sqrt(2D) dW
//
// The transform G1(x,y) = (1/x, x^2 y) is smooth and self-inverting with
// Jacobian determinant -1 everywhere on {x > 0}.

#include <Eigen/Dense>

#include "widthsde/errors.hpp"

namespace widthsde::model {

struct SdeParamsRef {
  double delta = 0.0;
  double gamma = 1.0;  // > 0
  double d = 1.0;      // noise intensity D, >= 0 (0 only for noiseless studies)
};

struct HalfPlaneState {
  double x = 1.0;  // width, > 0
  double y = 0.0;  // width velocity
};

struct TransformedState {
  double xi = 1.0;   // 1/x; any sign is representable, xi > 0 is the
                     // physical branch
  double eta = 0.0;  // x^2 y
};

struct VectorField2 {
  double a = 0.0;  // component on d/dxi
  double b = 0.0;  // component on d/deta
};

TransformedState to_transformed(const HalfPlaneState& s);
HalfPlaneState from_transformed(const TransformedState& t);

// Differential of G1 at s; determinant is -1 identically.
Eigen::Matrix2d g1_jacobian(const HalfPlaneState& s);

Eigen::Vector2d drift_original(const HalfPlaneState& s, const SdeParamsRef& p);
Eigen::Vector2d diffusion_original(const HalfPlaneState& s,
                                   const SdeParamsRef& p);

Eigen::Vector2d drift_transformed(const TransformedState& t,
                                  const SdeParamsRef& p);
// Additive noise: the diffusion vector is state independent.
Eigen::Vector2d diffusion_transformed(const SdeParamsRef& p);

// f_L(xi, eta) = xi^4 eta^2 / 2.
double lyapunov(const TransformedState& t);

// L f_L = delta xi^5 eta - gamma xi^8 eta^2 + D xi^4, obtained by applying
// the generator L = -xi^4 eta d_xi + (delta xi + 2 xi^3 eta^2
// - gamma xi^4 eta) d_eta + D d_eta^2 to f_L.
double generator_lyapunov(const TransformedState& t, const SdeParamsRef& p);

// Variant of the first term with xi in place of xi^5; kept only so the
// Monte Carlo cross-check can discriminate the two candidates.
double generator_lyapunov_linear_first_term(const TransformedState& t,
                                            const SdeParamsRef& p);

// Lie bracket [X0, X1] of the drift field X0 and the noise direction
// X1 = d/deta: (xi^4, -(4 xi^3 eta - gamma xi^4)).
VectorField2 bracket(const TransformedState& t, const SdeParamsRef& p);

// Rank of {X1, [X0, X1]}: 2 iff |det| = xi^4 exceeds tol.
int hormander_rank(const TransformedState& t, const SdeParamsRef& p,
                   double tol = 1e-9);

}  // namespace widthsde::model
