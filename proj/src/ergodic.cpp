#include "widthsde/ergodic.hpp"

#include <algorithm>
#include <cmath>

#include "widthsde/stats.hpp"

namespace widthsde::ergodic {

namespace {

Eigen::Index bin_of(const Eigen::ArrayXd& edges, double v) {
  // Cells are (lo, hi]: a sample exactly on the lower window edge counts as
  // outside, matching the half-open window convention.
  if (!(v > edges(0)) || v > edges(edges.size() - 1)) return -1;
  const double* begin = edges.data();
  const double* it = std::lower_bound(begin, begin + edges.size(), v);
  Eigen::Index k = static_cast<Eigen::Index>(it - begin);
  return k - 1;
}

void check_edges(const Eigen::ArrayXd& e, const char* what) {
  if (e.size() < 2) throw ConfigError(std::string(what) + ": need >= 2 edges");
  for (Eigen::Index i = 1; i < e.size(); ++i)
    if (!(e(i) > e(i - 1)))
      throw ConfigError(std::string(what) + ": edges must increase");
}

}  // namespace

Eigen::ArrayXd uniform_edges(double lo, double hi, int bins) {
  if (!(hi > lo) || bins < 1) throw ConfigError("uniform_edges: bad window");
  return Eigen::ArrayXd::LinSpaced(bins + 1, lo, hi);
}

HistogramAccumulator::HistogramAccumulator(integrate::System system,
                                           Eigen::ArrayXd x_edges,
                                           Eigen::ArrayXd y_edges,
                                           double burn_in)
    : system_(system),
      x_edges_(std::move(x_edges)),
      y_edges_(std::move(y_edges)),
      burn_in_(burn_in) {
  check_edges(x_edges_, "histogram x_edges");
  check_edges(y_edges_, "histogram y_edges");
  if (burn_in_ < 0.0) throw ConfigError("histogram: burn_in must be >= 0");
  weight_ = Eigen::MatrixXd::Zero(x_edges_.size() - 1, y_edges_.size() - 1);
}

void HistogramAccumulator::add(double t, double a, double b, double dt) {
  if (t < burn_in_ || dt <= 0.0) return;
  time_ += dt;
  const Eigen::Index i = bin_of(x_edges_, a);
  const Eigen::Index j = bin_of(y_edges_, b);
  if (i < 0 || j < 0)
    overflow_ += dt;
  else
    weight_(i, j) += dt;
}

void HistogramAccumulator::merge(const HistogramAccumulator& other) {
  if (weight_.rows() != other.weight_.rows() ||
      weight_.cols() != other.weight_.cols() || system_ != other.system_)
    throw WindowMismatch("histogram merge: incompatible accumulators");
  weight_ += other.weight_;
  overflow_ += other.overflow_;
  time_ += other.time_;
}

OccupationHistogram HistogramAccumulator::finalize(
    double min_post_burn_in_time) const {
  if (time_ <= 0.0 || time_ < min_post_burn_in_time)
    throw InsufficientData(
        "histogram: post-burn-in time below the configured minimum");
  OccupationHistogram h;
  h.coordinate_system = system_;
  h.x_edges = x_edges_;
  h.y_edges = y_edges_;
  h.mass = weight_ / time_;
  h.overflow = overflow_ / time_;
  h.total_time = time_ + burn_in_;
  h.burn_in = burn_in_;
  return h;
}

OccupationHistogram occupation(const integrate::PathSample& path,
                               const Eigen::ArrayXd& x_edges,
                               const Eigen::ArrayXd& y_edges, double burn_in,
                               double min_post_burn_in_time) {
  const Eigen::Index n = path.times.size();
  if (n < 2) throw InsufficientData("occupation: path too short");
  const double duration = path.times(n - 1);
  if (duration < 10.0 * burn_in)
    throw InsufficientData("occupation: total time must be >= 10x burn-in");
  HistogramAccumulator acc(path.coordinate_system, x_edges, y_edges, burn_in);
  // Left-point time weighting: state k holds over (t_k, t_{k+1}].
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    acc.add(path.times(k + 1), path.states(k, 0), path.states(k, 1),
            path.times(k + 1) - path.times(k));
  return acc.finalize(min_post_burn_in_time);
}

OccupationHistogram occupation_simulated(
    integrate::System system, const Eigen::Vector2d& init,
    const model::SdeParamsRef& p, const integrate::IntegratorConfig& cfg,
    const Eigen::ArrayXd& x_edges, const Eigen::ArrayXd& y_edges,
    double burn_in) {
  if (cfg.t_end < 10.0 * burn_in)
    throw InsufficientData("occupation: total time must be >= 10x burn-in");
  HistogramAccumulator acc(system, x_edges, y_edges, burn_in);
  double prev_a = init(0), prev_b = init(1);
  auto visit = [&](double t, double a, double b, double dt) {
    if (dt > 0.0) acc.add(t, prev_a, prev_b, dt);
    prev_a = a;
    prev_b = b;
  };
  if (system == integrate::System::original)
    integrate::visit_original({init(0), init(1)}, p, cfg, visit);
  else
    integrate::visit_transformed({init(0), init(1)}, p, cfg, visit);
  return acc.finalize();
}

OccupationHistogram pushforward(const OccupationHistogram& h,
                                const Eigen::ArrayXd& x_edges,
                                const Eigen::ArrayXd& y_edges, int refine,
                                bool strict) {
  if (h.coordinate_system != integrate::System::transformed)
    throw WindowMismatch("pushforward: source must be in (xi, eta)");
  if (!(h.x_edges(0) > 0.0))
    throw WindowMismatch("pushforward: source xi window must be positive");
  if (refine < 1) throw ConfigError("pushforward: refine must be >= 1");
  check_edges(x_edges, "pushforward x_edges");
  check_edges(y_edges, "pushforward y_edges");

  if (strict) {
    // Image of the source box under G1: x in [1/xi_hi, 1/xi_lo], and
    // |y| = xi^2 |eta| maximal at the box corners.
    const double xi_lo = h.x_edges(0);
    const double xi_hi = h.x_edges(h.x_edges.size() - 1);
    const double eta_lo = h.y_edges(0);
    const double eta_hi = h.y_edges(h.y_edges.size() - 1);
    const double y_max =
        xi_hi * xi_hi * std::max(std::abs(eta_lo), std::abs(eta_hi));
    if (1.0 / xi_hi <= x_edges(0) || 1.0 / xi_lo > x_edges(x_edges.size() - 1) ||
        -y_max < y_edges(0) || y_max > y_edges(y_edges.size() - 1))
      throw WindowMismatch(
          "pushforward: image of the source window is not contained in the "
          "target window");
  }

  OccupationHistogram out;
  out.coordinate_system = integrate::System::original;
  out.x_edges = x_edges;
  out.y_edges = y_edges;
  out.mass = Eigen::MatrixXd::Zero(x_edges.size() - 1, y_edges.size() - 1);
  out.overflow = h.overflow;
  out.total_time = h.total_time;
  out.burn_in = h.burn_in;

  const double sub = 1.0 / refine;
  for (Eigen::Index i = 0; i + 1 < h.x_edges.size(); ++i) {
    for (Eigen::Index j = 0; j + 1 < h.y_edges.size(); ++j) {
      const double cell_mass = h.mass(i, j);
      if (cell_mass == 0.0) continue;
      const double piece = cell_mass / (refine * refine);
      for (int a = 0; a < refine; ++a) {
        const double xi = h.x_edges(i) +
                          (a + 0.5) * sub * (h.x_edges(i + 1) - h.x_edges(i));
        for (int bsub = 0; bsub < refine; ++bsub) {
          const double eta =
              h.y_edges(j) +
              (bsub + 0.5) * sub * (h.y_edges(j + 1) - h.y_edges(j));
          const double x = 1.0 / xi;
          const double y = xi * xi * eta;
          const Eigen::Index bi = bin_of(x_edges, x);
          const Eigen::Index bj = bin_of(y_edges, y);
          if (bi < 0 || bj < 0)
            out.overflow += piece;
          else
            out.mass(bi, bj) += piece;
        }
      }
    }
  }
  return out;
}

double compare_histograms(const OccupationHistogram& a,
                          const OccupationHistogram& b) {
  if (a.coordinate_system != b.coordinate_system ||
      a.x_edges.size() != b.x_edges.size() ||
      a.y_edges.size() != b.y_edges.size() ||
      (a.x_edges - b.x_edges).abs().maxCoeff() > 0.0 ||
      (a.y_edges - b.y_edges).abs().maxCoeff() > 0.0)
    throw WindowMismatch(
        "compare_histograms: grids or coordinate systems differ");
  return 0.5 * ((a.mass - b.mass).array().abs().sum() +
                std::abs(a.overflow - b.overflow));
}

DecayReport decay_test(const integrate::PathSample& path,
                       double window_length, double floor,
                       int newey_west_lag) {
  if (path.coordinate_system != integrate::System::original)
    throw ConfigError("decay_test: path must be in original coordinates");
  if (!(window_length > 0.0))
    throw ConfigError("decay_test: window_length must be > 0");
  const Eigen::Index n = path.times.size();
  if (n < 2) throw InsufficientData("decay_test: path too short");
  const double duration = path.times(n - 1) - path.times(0);
  const int windows = static_cast<int>(std::floor(
      (duration + 1e-9 * window_length) / window_length));
  if (windows < 20)
    throw InsufficientData("decay_test: need >= 20 full windows");

  const double t0 = path.times(0);
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(windows);
  Eigen::ArrayXi count = Eigen::ArrayXi::Zero(windows);
  double below = 0.0, total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const int w = std::min<int>(
        windows - 1,
        static_cast<int>((path.times(k) - t0) / window_length));
    const double x = path.states(k, 0);
    if (path.times(k) - t0 <= windows * window_length) {
      sum(w) += std::log(x);
      count(w) += 1;
    }
    if (k + 1 < n) {
      const double dt = path.times(k + 1) - path.times(k);
      total += dt;
      if (x < floor) below += dt;
    }
  }

  DecayReport rep;
  rep.window_length = window_length;
  rep.windows = windows;
  rep.window_times.resize(windows);
  rep.window_log_means.resize(windows);
  for (int w = 0; w < windows; ++w) {
    if (count(w) == 0)
      throw InsufficientData("decay_test: empty window");
    rep.window_times(w) = t0 + (w + 0.5) * window_length;
    rep.window_log_means(w) = sum(w) / count(w);
  }
  const auto fit =
      stats::ols_newey_west(rep.window_times, rep.window_log_means,
                            newey_west_lag);
  rep.slope = fit.slope;
  rep.ci_lo = fit.slope - 1.96 * fit.slope_se;
  rep.ci_hi = fit.slope + 1.96 * fit.slope_se;
  rep.fraction_below_floor = total > 0.0 ? below / total : 0.0;
  return rep;
}

}  // namespace widthsde::ergodic
