#pragma once

// Long-run occupation statistics: time-weighted histograms as empirical
// invariant measures, the unit-Jacobian pushforward between the two
// coordinate systems, the total-variation comparison, and the decay-slope
// audit of log-width trajectories.

#include <Eigen/Dense>

#include "widthsde/integrate.hpp"

namespace widthsde::ergodic {

struct OccupationHistogram {
  integrate::System coordinate_system = integrate::System::original;
  Eigen::ArrayXd x_edges;  // first-coordinate bin edges, increasing
  Eigen::ArrayXd y_edges;  // second-coordinate bin edges, increasing
  Eigen::MatrixXd mass;    // (nx, ny); sums with overflow to 1
  double overflow = 0.0;   // time fraction spent outside the window
  double total_time = 0.0;
  double burn_in = 0.0;
};

// Mergeable time-weighted accumulator; merging is associative so ensembles
// can reduce in any fixed order.
class HistogramAccumulator {
 public:
  HistogramAccumulator(integrate::System system, Eigen::ArrayXd x_edges,
                       Eigen::ArrayXd y_edges, double burn_in);

  void add(double t, double a, double b, double dt);
  void merge(const HistogramAccumulator& other);
  OccupationHistogram finalize(double min_post_burn_in_time = 0.0) const;

 private:
  integrate::System system_;
  Eigen::ArrayXd x_edges_, y_edges_;
  Eigen::MatrixXd weight_;
  double overflow_ = 0.0;
  double time_ = 0.0;  // accumulated post-burn-in time
  double burn_in_ = 0.0;
};

// Time-weighted occupation measure of a stored path after burn-in.
OccupationHistogram occupation(const integrate::PathSample& path,
                               const Eigen::ArrayXd& x_edges,
                               const Eigen::ArrayXd& y_edges, double burn_in,
                               double min_post_burn_in_time = 0.0);

// Streaming variant that never stores the trajectory.
OccupationHistogram occupation_simulated(
    integrate::System system, const Eigen::Vector2d& init,
    const model::SdeParamsRef& p, const integrate::IntegratorConfig& cfg,
    const Eigen::ArrayXd& x_edges, const Eigen::ArrayXd& y_edges,
    double burn_in);

// Transport a histogram over (xi, eta) through G1 onto an (x, y) grid by
// subdividing each source cell refine x refine times and mapping subcell
// centers; the Jacobian determinant of G1 has magnitude 1, so cell masses
// transport without volume correction. Subcell images outside the target
// window land in the overflow; with strict = true a source window whose
// image is not contained in the target window raises WindowMismatch
// instead.
OccupationHistogram pushforward(const OccupationHistogram& h,
                                const Eigen::ArrayXd& x_edges,
                                const Eigen::ArrayXd& y_edges, int refine = 4,
                                bool strict = false);

// Total-variation distance including the overflow cell; requires identical
// grids and coordinate system.
double compare_histograms(const OccupationHistogram& a,
                          const OccupationHistogram& b);

struct DecayReport {
  double window_length = 0.0;
  Eigen::ArrayXd window_times;      // window midpoints
  Eigen::ArrayXd window_log_means;  // mean log x per window
  double slope = 0.0;               // per unit time
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% interval (Newey-West)
  double fraction_below_floor = 0.0;
  int windows = 0;
};

// OLS of window-mean log x against window midpoint time with a Newey-West
// slope variance (Bartlett weights). Requires >= 20 full windows.
DecayReport decay_test(const integrate::PathSample& path,
                       double window_length, double floor = 0.01,
                       int newey_west_lag = 5);

Eigen::ArrayXd uniform_edges(double lo, double hi, int bins);

}  // namespace widthsde::ergodic
