#pragma once

// Pathwise SDE integration of both coordinate systems, a deterministic RK4
// reference, and empirical strong-convergence studies with coupled
// Brownian increments.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "widthsde/model.hpp"

namespace widthsde::integrate {

enum class Scheme { euler_maruyama, tamed_euler, adaptive_em };
enum class System { original, transformed };
enum class Termination { completed, step_blow_up, numerical_overflow };

const char* to_string(Scheme s);
const char* to_string(System s);
const char* to_string(Termination t);

struct IntegratorConfig {
  Scheme scheme = Scheme::euler_maruyama;
  double dt = 1e-3;       // base step
  double t_end = 1.0;
  double x_floor = 0.01;  // diagnostic boundary threshold
  double dt_min = 1e-8;   // adaptive floor
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  int record_stride = 1;  // keep every k-th step in the stored path

  void validate() const;  // throws ConfigError
};

struct PathSample {
  Eigen::ArrayXd times;       // strictly increasing, starts at 0
  Eigen::MatrixX2d states;    // row k = state at times(k)
  System coordinate_system = System::original;
  double min_x = 0.0;         // minimum width (or 1/xi) along the path
  bool hit_floor = false;
  std::uint64_t rng_fingerprint = 0;
  Termination termination = Termination::completed;
  std::uint64_t steps_taken = 0;
};

// Step sizes used by the adaptive scheme: dt * x^4 clamped to
// [dt_min, dt], so steps shrink near the x = 0 boundary at the same rate
// as the intrinsic clock of the width dynamics.
double adaptive_step(double x, const IntegratorConfig& cfg);

// Streaming step visitor: called after every accepted step with the new
// time, the new state and the step size that produced it.
using StepVisitor = std::function<void(double t, double a, double b, double dt)>;

PathSample simulate_original(const model::HalfPlaneState& init,
                             const model::SdeParamsRef& p,
                             const IntegratorConfig& cfg);
PathSample simulate_transformed(const model::TransformedState& init,
                                const model::SdeParamsRef& p,
                                const IntegratorConfig& cfg);

// Histogram-friendly variants that do not store the path.
void visit_original(const model::HalfPlaneState& init,
                    const model::SdeParamsRef& p, const IntegratorConfig& cfg,
                    const StepVisitor& visit);
void visit_transformed(const model::TransformedState& init,
                       const model::SdeParamsRef& p,
                       const IntegratorConfig& cfg, const StepVisitor& visit);

struct StrongErrorResult {
  std::vector<std::pair<double, double>> errors;  // (dt, mean |Z_dt - Z_ref|)
  double slope = 0.0;                             // log-log least squares
  int n_paths = 0;
  int n_dropped = 0;  // coupled families discarded after a truncation
};

// Coupled-refinement strong error at t_end = 1 against a reference path at
// dt_finest / 4, sharing Brownian increments across refinement levels.
StrongErrorResult strong_error_study(System system,
                                     const Eigen::Vector2d& init,
                                     const model::SdeParamsRef& p,
                                     const std::vector<double>& dt_list,
                                     int n_paths, std::uint64_t seed,
                                     double t_end = 1.0);

// Classical fixed-step RK4 for dz/dt = field(t, z).
PathSample rk4_ode(
    const std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>& field,
    const Eigen::Vector2d& init, double t_end, double dt);

}  // namespace widthsde::integrate
