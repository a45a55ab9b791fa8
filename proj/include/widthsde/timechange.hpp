#pragma once

// Constructive weak solution of the width dynamics by random time change.
//
// On an auxiliary clock s, the velocity component is an exact
// Ornstein-Uhlenbeck process
//
//   yhat(s) = e^{-gamma s} y0 + sqrt(2D) Int_0^s e^{-gamma(s-r)} dB_r,
//
// the width is the closed form
//
//   xhat(s) = [x0^{-3} - 3 Int_0^s yhat(r) dr]^{-1/3},
//
// defined until the running integral of yhat first reaches x0^{-3}/3 (the
// blow-up time tau of the clock), and the physical time is
//
//   T_s = Int_0^s xhat(r)^4 dr,   A_t = inf{ s : T_s > t }.
//
// Then x_+(t) = xhat(A_t), y_+(t) = yhat(A_t) solves the width SDE after an
// exponential change of measure with log-density
//
//   log rho(t) = Int theta dB - 1/2 Int theta^2 ds,
//   theta(s)   = 1_{[0, A_horizon]}(s) * delta * xhat(s) / sqrt(2D),
//
// accumulated along the auxiliary grid. Expectations under the target law
// are weighted averages E[g * rho].

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "widthsde/model.hpp"

namespace widthsde::timechange {

struct OuSamples {
  Eigen::ArrayXd y_hat;  // exact-in-distribution OU values on the grid
  Eigen::ArrayXd b;      // Brownian values recovered from
                         // B_s = (yhat - y0 + gamma Int yhat) / sqrt(2D)
};

// Exact OU transitions yhat(s+h) = e^{-gamma h} yhat(s) + N(0, (D/gamma)
// (1 - e^{-2 gamma h})) on an arbitrary increasing grid starting at 0.
OuSamples ou_exact(double y0, const model::SdeParamsRef& p,
                   const Eigen::ArrayXd& s_grid, std::uint64_t seed,
                   std::uint64_t path_index = 0);

struct AuxiliaryPath {
  std::vector<double> s_grid;          // increasing from 0
  std::vector<double> b;               // recovered Brownian values
  std::vector<double> y_hat;           // OU samples
  std::vector<double> y_hat_integral;  // running trapezoid of y_hat
  std::vector<double> x_hat;           // NaN once the crossing has passed
  std::vector<double> clock_t;         // running T_s; +inf past the crossing

  std::optional<std::pair<double, double>> tau_bracket;
  double tau = std::numeric_limits<double>::quiet_NaN();  // refined estimate

  double x0 = 1.0, y0 = 0.0;
  double level = 0.0;  // x0^{-3}/3, the crossing level of Int y_hat
  model::SdeParamsRef params;

  // Stream bookkeeping so grids extend deterministically.
  std::uint64_t seed = 0, path_index = 0, draws_used = 0;

  // Endpoint of the panel in which the crossing was detected during
  // adaptive growth; it anchors the interpolant on (s_back, tau] while the
  // stored nodes stay strictly before tau.
  double panel_s_end = std::numeric_limits<double>::quiet_NaN();
  double panel_y_end = std::numeric_limits<double>::quiet_NaN();
  double panel_b_end = std::numeric_limits<double>::quiet_NaN();

  bool crossed() const { return tau_bracket.has_value(); }
  double s_back() const { return s_grid.back(); }
  double clock_back() const { return clock_t.back(); }

  // Piecewise evaluation consistent with the stored trapezoid interpolant:
  // y_hat linear, its integral quadratic, x_hat closed form, B linear.
  double interp_y(double s) const;
  double interp_integral(double s) const;
  double interp_x(double s) const;
  double interp_b(double s) const;
  // Clock value at arbitrary s by panel-local refinement of Int x_hat^4.
  double clock_at(double s) const;
  // Inverse clock: the s with clock_at(s) = t, bisected inside the stored
  // grid panel that brackets t.
  double inverse_clock(double t) const;
};

struct GrowPolicy {
  double base_ds = 1e-3;
  double ds_floor = 1e-12;  // GridExhausted below this
  double s_max = 1e4;       // GridExhausted beyond this
};

// Build the auxiliary path on the given grid and detect the first crossing
// of Int y_hat through x0^{-3}/3, refining tau by bisection on the
// trapezoid interpolant.
AuxiliaryPath aux_path(double x0, double y0, const model::SdeParamsRef& p,
                       const Eigen::ArrayXd& s_grid, std::uint64_t seed,
                       std::uint64_t path_index = 0);

// Append exact OU steps (sizes shrink adaptively as the crossing level
// approaches) until the clock exceeds t_target. Throws GridExhausted at the
// step floor or s_max.
void grow_until_clock(AuxiliaryPath& aux, double t_target,
                      const GrowPolicy& policy = {});

// Extend until the crossing is bracketed; returns false if s_max is hit
// first. Used by the tau-detection diagnostics.
bool grow_until_crossing(AuxiliaryPath& aux, const GrowPolicy& policy = {});

// A_t on the requested grid (the inverse clock); grows the path as needed.
Eigen::ArrayXd time_change(AuxiliaryPath& aux, const Eigen::ArrayXd& t_grid,
                           const GrowPolicy& policy = {});

struct WeightedPath {
  Eigen::ArrayXd times;       // the physical t-clock
  Eigen::MatrixX2d states;    // (x_+, y_+)
  Eigen::ArrayXd log_weight;  // running log rho, log_weight(0) = 0
  double horizon = 1.0;

  std::uint64_t seed = 0, path_index = 0;
  int segments = 1;  // concatenated constructions so far
};

struct WeakSampleConfig {
  double ds = 1e-3;         // base auxiliary step
  double ds_floor = 1e-12;
  double s_max = 1e4;
  int n_t = 1001;           // output points on [0, horizon]
  // Replaces theta by 2D * theta in the exponent (a documented variant for
  // comparison runs; the default pair matches the drift shift that the
  // change of measure must produce).
  bool scaled_exponent_variant = false;
};

WeightedPath weak_sample(double x0, double y0, const model::SdeParamsRef& p,
                         double horizon, const WeakSampleConfig& cfg,
                         std::uint64_t seed, std::uint64_t path_index = 0);

// Restart the construction from the terminal state with a fresh Brownian
// stream and concatenate; log-weights add across segments.
WeightedPath extend(const WeightedPath& path, const model::SdeParamsRef& p,
                    const WeakSampleConfig& cfg, std::uint64_t seed,
                    double extra_horizon = 1.0);

// Probe of the clock blow-up at tau: evaluates the clock at geometrically
// shrinking offsets eps from the interpolant root and reports the largest
// clock value reached before eps underflows eps_floor.
struct BlowupProbe {
  double clock_reached = 0.0;
  double eps_at_target = std::numeric_limits<double>::quiet_NaN();
  bool reached_target = false;
};
BlowupProbe clock_blowup_probe(const AuxiliaryPath& aux, double clock_target,
                               double eps_floor = 1e-30);

}  // namespace widthsde::timechange
