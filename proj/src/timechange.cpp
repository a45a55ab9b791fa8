#include "widthsde/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "widthsde/errors.hpp"
#include "widthsde/rng.hpp"

namespace widthsde::timechange {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGl8Node[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGl8Weight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double inv_cbrt(double v) { return 1.0 / std::cbrt(v); }

// x_hat^4 = g3^{-4/3} with g3 = x0^{-3} - 3 Int y_hat = 3 (level - Int).
double clock_rate(double g3) {
  const double c = std::cbrt(g3);
  const double c2 = c * c;
  return 1.0 / (c2 * c2);
}

std::size_t panel_of(const std::vector<double>& grid, double s) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), s);
  return std::clamp<std::size_t>(static_cast<std::size_t>(it - grid.begin()),
                                 1, grid.size() - 1) -
         1;
}

}  // namespace

OuSamples ou_exact(double y0, const model::SdeParamsRef& p,
                   const Eigen::ArrayXd& s_grid, std::uint64_t seed,
                   std::uint64_t path_index) {
  if (!(p.gamma > 0.0)) throw ConfigError("ou_exact: gamma must be > 0");
  if (p.d < 0.0) throw ConfigError("ou_exact: d must be >= 0");
  const Eigen::Index n = s_grid.size();
  if (n < 1 || s_grid(0) != 0.0)
    throw ConfigError("ou_exact: grid must start at 0");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(s_grid(i) > s_grid(i - 1)))
      throw ConfigError("ou_exact: grid must be strictly increasing");

  OuSamples out;
  out.y_hat.resize(n);
  out.b.resize(n);
  out.y_hat(0) = y0;
  out.b(0) = 0.0;
  double integral = 0.0;
  const double sqrt2d = std::sqrt(2.0 * p.d);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = s_grid(i) - s_grid(i - 1);
    const double decay = std::exp(-p.gamma * h);
    const double sd = std::sqrt(p.d / p.gamma * (1.0 - decay * decay));
    const double z =
        rng::gaussian(seed, path_index, static_cast<std::uint64_t>(i - 1));
    out.y_hat(i) = decay * out.y_hat(i - 1) + sd * z;
    integral += 0.5 * h * (out.y_hat(i - 1) + out.y_hat(i));
    out.b(i) = sqrt2d == 0.0
                   ? 0.0
                   : (out.y_hat(i) - y0 + p.gamma * integral) / sqrt2d;
  }
  return out;
}

double AuxiliaryPath::interp_y(double s) const {
  const std::size_t k = panel_of(s_grid, s);
  const double w = (s - s_grid[k]) / (s_grid[k + 1] - s_grid[k]);
  return (1.0 - w) * y_hat[k] + w * y_hat[k + 1];
}

double AuxiliaryPath::interp_integral(double s) const {
  const std::size_t k = panel_of(s_grid, s);
  const double h = s_grid[k + 1] - s_grid[k];
  const double u = s - s_grid[k];
  const double c = (y_hat[k + 1] - y_hat[k]) / h;
  return y_hat_integral[k] + u * (y_hat[k] + 0.5 * c * u);
}

double AuxiliaryPath::interp_x(double s) const {
  const double g3 = 3.0 * (level - interp_integral(s));
  return g3 > 0.0 ? inv_cbrt(g3) : kNan;
}

double AuxiliaryPath::interp_b(double s) const {
  const std::size_t k = panel_of(s_grid, s);
  const double w = (s - s_grid[k]) / (s_grid[k + 1] - s_grid[k]);
  return (1.0 - w) * b[k] + w * b[k + 1];
}

double AuxiliaryPath::clock_at(double s) const {
  const std::size_t k = panel_of(s_grid, s);
  if (!std::isfinite(clock_t[k])) return kInf;
  const double u1 = s - s_grid[k];
  if (u1 <= 0.0) return clock_t[k];
  const double h = s_grid[k + 1] - s_grid[k];
  const double c = (y_hat[k + 1] - y_hat[k]) / h;
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double u = 0.5 * u1 * (1.0 + kGl8Node[i]);
    const double integral = y_hat_integral[k] + u * (y_hat[k] + 0.5 * c * u);
    const double g3 = 3.0 * (level - integral);
    if (!(g3 > 0.0)) return kInf;
    acc += kGl8Weight[i] * clock_rate(g3);
  }
  return clock_t[k] + 0.5 * u1 * acc;
}

double AuxiliaryPath::inverse_clock(double t) const {
  if (t <= 0.0) return 0.0;
  double t_covered = clock_back();
  if (!std::isfinite(t_covered)) {
    for (std::size_t k = clock_t.size(); k-- > 0;)
      if (std::isfinite(clock_t[k])) {
        t_covered = clock_t[k];
        break;
      }
  }
  if (!(t <= t_covered))
    throw GridExhausted("inverse_clock: clock does not reach requested time");
  const auto it = std::upper_bound(clock_t.begin(), clock_t.end(), t);
  const std::size_t k =
      std::clamp<std::size_t>(static_cast<std::size_t>(it - clock_t.begin()),
                              1, clock_t.size() - 1) -
      1;
  double lo = s_grid[k], hi = s_grid[k + 1];
  if (clock_t[k] >= t) return lo;
  for (int iter = 0; iter < 90; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double tm = clock_at(mid);
    if (std::abs(tm - t) <= 1e-13 * std::max(1.0, t)) return mid;
    if (tm < t)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Crossing of the running integral through the level inside the panel
// (s_last, s_new]: either the endpoint is across, or the quadratic
// interpolant peaks across in the interior. On detection, tau is located
// by bisection for the first root and the panel endpoint is kept aside so
// the interpolant toward tau stays available.
struct CrossingScan {
  bool crossed = false;
  double tau = kNan;
  std::pair<double, double> bracket{kNan, kNan};
};

CrossingScan scan_crossing(double s_old, double y_old, double i_old,
                           double s_new, double y_new, double level) {
  const double h = s_new - s_old;
  const double c = (y_new - y_old) / h;
  const double i_new = i_old + 0.5 * h * (y_old + y_new);
  double cross_hi = -1.0;
  if (i_new >= level) {
    cross_hi = h;
  } else if (c < 0.0 && y_old > 0.0) {
    const double u_peak = -y_old / c;
    if (u_peak > 0.0 && u_peak < h) {
      const double i_peak = i_old + u_peak * (y_old + 0.5 * c * u_peak);
      if (i_peak >= level) cross_hi = u_peak;
    }
  }
  CrossingScan scan;
  if (cross_hi < 0.0) return scan;
  scan.crossed = true;
  double lo = 0.0, hi = cross_hi;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double im = i_old + mid * (y_old + 0.5 * c * mid);
    if (im < level)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * std::max(1.0, s_old + hi)) break;
  }
  scan.tau = s_old + 0.5 * (lo + hi);
  scan.bracket = {s_old + lo, s_old + hi};
  return scan;
}

}  // namespace

// Append a node with s strictly before any crossing; x_hat and the clock
// increment follow from the trapezoid interpolant of Int y_hat.
void push_alive(AuxiliaryPath& aux, double s_new, double y_new,
                double b_new) {
  const double h = s_new - aux.s_grid.back();
  const double y_old = aux.y_hat.back();
  const double i_old = aux.y_hat_integral.back();
  const double c = (y_new - y_old) / h;
  const double i_new = i_old + 0.5 * h * (y_old + y_new);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double u = 0.5 * h * (1.0 + kGl8Node[i]);
    const double integral = i_old + u * (y_old + 0.5 * c * u);
    acc += kGl8Weight[i] * clock_rate(3.0 * (aux.level - integral));
  }
  aux.s_grid.push_back(s_new);
  aux.y_hat.push_back(y_new);
  aux.b.push_back(b_new);
  aux.y_hat_integral.push_back(i_new);
  const double g3 = 3.0 * (aux.level - i_new);
  aux.x_hat.push_back(g3 > 0.0 ? inv_cbrt(g3) : kNan);
  aux.clock_t.push_back(aux.clock_t.back() + 0.5 * h * acc);
}

double draw_ou_step(AuxiliaryPath& aux, double h, double& b_new) {
  const auto& p = aux.params;
  const double decay = std::exp(-p.gamma * h);
  const double sd = std::sqrt(p.d / p.gamma * (1.0 - decay * decay));
  const double z = rng::gaussian(aux.seed, aux.path_index, aux.draws_used++);
  const double y_new = decay * aux.y_hat.back() + sd * z;
  const double i_new =
      aux.y_hat_integral.back() + 0.5 * h * (aux.y_hat.back() + y_new);
  const double sqrt2d = std::sqrt(2.0 * p.d);
  b_new =
      sqrt2d == 0.0 ? 0.0 : (y_new - aux.y0 + p.gamma * i_new) / sqrt2d;
  return y_new;
}

// Adapted step-size guard: keep the expected advance of Int y_hat plus a
// four-sigma noise margin below half the remaining gap to the level, so
// steps halve geometrically as tau approaches. Uses only the current state,
// never the proposal, so the sampled law is untouched.
double guarded_step(const AuxiliaryPath& aux, const GrowPolicy& policy) {
  double ds = policy.base_ds;
  const double gap = aux.level - aux.y_hat_integral.back();
  if (gap > 0.0) {
    const double speed = std::abs(aux.y_hat.back());
    if (speed > 0.0) ds = std::min(ds, 0.5 * gap / speed);
    if (aux.params.d > 0.0)
      ds = std::min(ds, std::cbrt(3.0 * gap * gap / (128.0 * aux.params.d)));
  }
  return std::max(ds, policy.ds_floor);
}

// One exact OU step during adaptive growth. Returns false when the step
// crosses tau; the node is then withheld from the arrays and kept as the
// bracket-panel endpoint.
bool growth_step(AuxiliaryPath& aux, double h) {
  double b_new = 0.0;
  const double y_new = draw_ou_step(aux, h, b_new);
  const double s_new = aux.s_grid.back() + h;
  if (!aux.crossed()) {
    const CrossingScan scan =
        scan_crossing(aux.s_grid.back(), aux.y_hat.back(),
                      aux.y_hat_integral.back(), s_new, y_new, aux.level);
    if (scan.crossed) {
      aux.tau = scan.tau;
      aux.tau_bracket = scan.bracket;
      aux.panel_s_end = s_new;
      aux.panel_y_end = y_new;
      aux.panel_b_end = b_new;
      return false;
    }
  }
  push_alive(aux, s_new, y_new, b_new);
  return true;
}

// Halve the remaining distance to tau along the recorded bracket-panel
// interpolant; no new randomness is involved.
void refine_toward_tau(AuxiliaryPath& aux, const GrowPolicy& policy) {
  if (!std::isfinite(aux.panel_s_end))
    throw ConfigError(
        "grow_until_clock: grid recorded past its crossing cannot be grown");
  const double remaining = aux.tau - aux.s_grid.back();
  if (remaining < policy.ds_floor)
    throw GridExhausted(
        "grow_until_clock: step floor reached before the clock covered the "
        "horizon");
  const double s_new = aux.s_grid.back() + 0.5 * remaining;
  const double w =
      (s_new - aux.s_grid.back()) / (aux.panel_s_end - aux.s_grid.back());
  const double y_new = (1.0 - w) * aux.y_hat.back() + w * aux.panel_y_end;
  const double b_new = (1.0 - w) * aux.b.back() + w * aux.panel_b_end;
  push_alive(aux, s_new, y_new, b_new);
}

AuxiliaryPath aux_path(double x0, double y0, const model::SdeParamsRef& p,
                       const Eigen::ArrayXd& s_grid, std::uint64_t seed,
                       std::uint64_t path_index) {
  if (!(x0 > 0.0)) throw NonpositiveWidth("aux_path: x0 must be > 0");
  if (!(p.gamma > 0.0)) throw ConfigError("aux_path: gamma must be > 0");
  if (s_grid.size() < 1 || s_grid(0) != 0.0)
    throw ConfigError("aux_path: grid must start at 0");

  AuxiliaryPath aux;
  aux.x0 = x0;
  aux.y0 = y0;
  aux.level = 1.0 / (3.0 * x0 * x0 * x0);
  aux.params = p;
  aux.seed = seed;
  aux.path_index = path_index;
  aux.s_grid = {0.0};
  aux.y_hat = {y0};
  aux.b = {0.0};
  aux.y_hat_integral = {0.0};
  aux.x_hat = {x0};
  aux.clock_t = {0.0};

  for (Eigen::Index i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid(i) > s_grid(i - 1)))
      throw ConfigError("aux_path: grid must be strictly increasing");
    const double h = s_grid(i) - s_grid(i - 1);
    double b_new = 0.0;
    const double y_new = draw_ou_step(aux, h, b_new);
    if (!aux.crossed()) {
      const CrossingScan scan =
          scan_crossing(aux.s_grid.back(), aux.y_hat.back(),
                        aux.y_hat_integral.back(), s_grid(i), y_new,
                        aux.level);
      if (scan.crossed) {
        aux.tau = scan.tau;
        aux.tau_bracket = scan.bracket;
      }
    }
    // Explicit grids record every node; x_hat is NaN and the clock is
    // infinite once tau has passed.
    if (!aux.crossed() || s_grid(i) < aux.tau) {
      push_alive(aux, s_grid(i), y_new, b_new);
    } else {
      const double i_new =
          aux.y_hat_integral.back() + 0.5 * h * (aux.y_hat.back() + y_new);
      aux.s_grid.push_back(s_grid(i));
      aux.y_hat.push_back(y_new);
      aux.b.push_back(b_new);
      aux.y_hat_integral.push_back(i_new);
      aux.x_hat.push_back(kNan);
      aux.clock_t.push_back(kInf);
    }
  }
  return aux;
}

void grow_until_clock(AuxiliaryPath& aux, double t_target,
                      const GrowPolicy& policy) {
  while (!(aux.clock_back() > t_target)) {
    if (aux.crossed()) {
      refine_toward_tau(aux, policy);
    } else {
      if (aux.s_back() > policy.s_max)
        throw GridExhausted("grow_until_clock: s_max exceeded");
      growth_step(aux, guarded_step(aux, policy));
    }
  }
}

bool grow_until_crossing(AuxiliaryPath& aux, const GrowPolicy& policy) {
  if (aux.crossed()) return true;
  if (!std::isfinite(aux.clock_back()))
    throw ConfigError(
        "grow_until_crossing: grid recorded past its crossing cannot be "
        "grown");
  while (!aux.crossed()) {
    if (aux.s_back() >= policy.s_max) return false;
    growth_step(aux, guarded_step(aux, policy));
  }
  return true;
}

Eigen::ArrayXd time_change(AuxiliaryPath& aux, const Eigen::ArrayXd& t_grid,
                           const GrowPolicy& policy) {
  const Eigen::Index n = t_grid.size();
  if (n < 1) throw ConfigError("time_change: empty grid");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(t_grid(i) > t_grid(i - 1)))
      throw ConfigError("time_change: grid must be strictly increasing");
  grow_until_clock(aux, t_grid(n - 1), policy);
  Eigen::ArrayXd a(n);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = aux.inverse_clock(t_grid(i));
  return a;
}

WeightedPath weak_sample(double x0, double y0, const model::SdeParamsRef& p,
                         double horizon, const WeakSampleConfig& cfg,
                         std::uint64_t seed, std::uint64_t path_index) {
  if (!(x0 > 0.0)) throw NonpositiveWidth("weak_sample: x0 must be > 0");
  if (!(horizon > 0.0)) throw ConfigError("weak_sample: horizon must be > 0");
  if (cfg.n_t < 2) throw ConfigError("weak_sample: n_t must be >= 2");
  if (p.d == 0.0 && p.delta != 0.0)
    throw ConfigError(
        "weak_sample: the exponential reweighting needs d > 0 when delta != "
        "0");

  const GrowPolicy policy{cfg.ds, cfg.ds_floor, cfg.s_max};
  AuxiliaryPath aux =
      aux_path(x0, y0, p, Eigen::ArrayXd::Zero(1), seed, path_index);
  const Eigen::ArrayXd t_grid =
      Eigen::ArrayXd::LinSpaced(cfg.n_t, 0.0, horizon);
  const Eigen::ArrayXd a = time_change(aux, t_grid, policy);
  const double a_horizon = a(a.size() - 1);

  WeightedPath out;
  out.times = t_grid;
  out.horizon = horizon;
  out.seed = seed;
  out.path_index = path_index;
  out.states.resize(cfg.n_t, 2);
  out.log_weight = Eigen::ArrayXd::Zero(cfg.n_t);
  out.states(0, 0) = x0;
  out.states(0, 1) = y0;
  for (Eigen::Index i = 1; i < cfg.n_t; ++i) {
    const double x = aux.interp_x(a(i));
    if (!(x > 0.0))
      throw NonpositiveWidth("weak_sample: nonpositive width sample");
    out.states(i, 0) = x;
    out.states(i, 1) = aux.interp_y(a(i));
  }

  if (p.delta != 0.0) {
    // Cumulative exponent sums over the auxiliary nodes; the integrand is
    // active exactly on [0, A_horizon].
    const double theta_coeff =
        cfg.scaled_exponent_variant
            ? p.delta * std::sqrt(2.0 * p.d)   // comparison variant
            : p.delta / std::sqrt(2.0 * p.d);  // matches the drift shift
    const std::size_t n_nodes = aux.s_grid.size();
    std::vector<double> cumulative(n_nodes, 0.0);
    for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
      if (aux.s_grid[k] >= a_horizon) {
        cumulative[k + 1] = cumulative[k];
        continue;
      }
      const double theta = theta_coeff * aux.x_hat[k];
      const double s_hi = std::min(aux.s_grid[k + 1], a_horizon);
      const double db = aux.interp_b(s_hi) - aux.b[k];
      const double dsl = s_hi - aux.s_grid[k];
      cumulative[k + 1] =
          cumulative[k] + theta * db - 0.5 * theta * theta * dsl;
    }
    for (Eigen::Index i = 1; i < cfg.n_t; ++i) {
      const double s = std::min(a(i), a_horizon);
      const std::size_t k = panel_of(aux.s_grid, s);
      const double theta = theta_coeff * aux.x_hat[k];
      double lw = cumulative[k];
      if (s > aux.s_grid[k]) {
        const double db = aux.interp_b(s) - aux.b[k];
        lw += theta * db - 0.5 * theta * theta * (s - aux.s_grid[k]);
      }
      out.log_weight(i) = lw;
    }
  }
  return out;
}

WeightedPath extend(const WeightedPath& path, const model::SdeParamsRef& p,
                    const WeakSampleConfig& cfg, std::uint64_t seed,
                    double extra_horizon) {
  const Eigen::Index n = path.times.size();
  if (n < 2) throw ConfigError("extend: path has no samples");
  const double x_end = path.states(n - 1, 0);
  const double y_end = path.states(n - 1, 1);
  const double lw_end = path.log_weight(n - 1);

  const std::uint64_t segment_stream = rng::substream(
      path.path_index, static_cast<std::uint64_t>(path.segments));
  const WeightedPath next =
      weak_sample(x_end, y_end, p, extra_horizon, cfg, seed, segment_stream);

  const Eigen::Index m = next.times.size();
  WeightedPath out;
  out.horizon = path.horizon + extra_horizon;
  out.seed = path.seed;
  out.path_index = path.path_index;
  out.segments = path.segments + 1;
  out.times.resize(n + m - 1);
  out.states.resize(n + m - 1, 2);
  out.log_weight.resize(n + m - 1);
  out.times.head(n) = path.times;
  out.states.topRows(n) = path.states;
  out.log_weight.head(n) = path.log_weight;
  // The restart reuses the terminal state, so the junction is continuous by
  // construction; the duplicated t = horizon node of the new segment is
  // dropped.
  out.times.tail(m - 1) = next.times.tail(m - 1) + path.horizon;
  out.states.bottomRows(m - 1) = next.states.bottomRows(m - 1);
  out.log_weight.tail(m - 1) = next.log_weight.tail(m - 1) + lw_end;
  return out;
}

BlowupProbe clock_blowup_probe(const AuxiliaryPath& aux, double clock_target,
                               double eps_floor) {
  if (!aux.crossed())
    throw ConfigError("clock_blowup_probe: path has not crossed");

  // Local form of the gap near tau: with eps = tau - s and the panel slope
  // c of y_hat,
  //   x0^{-3} - 3 Int y_hat = 3 eps (v - 0.5 c eps),   v = y_hat at tau,
  // an exact polynomial identity on the interpolant. Carrying eps directly
  // keeps the evaluation accurate far below the spacing of representable
  // s values near tau.
  double s_anchor, y_anchor, clock_anchor, c;
  if (aux.tau > aux.s_back()) {
    // Crossing was detected during adaptive growth; the bracket panel runs
    // from the last stored node to the withheld endpoint.
    s_anchor = aux.s_back();
    y_anchor = aux.y_hat.back();
    clock_anchor = aux.clock_back();
    c = (aux.panel_y_end - y_anchor) / (aux.panel_s_end - s_anchor);
  } else {
    const std::size_t k = panel_of(aux.s_grid, aux.tau);
    s_anchor = aux.s_grid[k];
    y_anchor = aux.y_hat[k];
    clock_anchor = aux.clock_t[k];
    c = (aux.y_hat[k + 1] - aux.y_hat[k]) /
        (aux.s_grid[k + 1] - aux.s_grid[k]);
  }
  const double v = y_anchor + c * (aux.tau - s_anchor);

  double eps_hi = aux.tau - s_anchor;
  double clock = clock_anchor;
  BlowupProbe probe;
  probe.clock_reached = clock;
  while (eps_hi > eps_floor) {
    const double eps_lo = 0.5 * eps_hi;
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double eps =
          eps_lo + 0.5 * (eps_hi - eps_lo) * (1.0 + kGl8Node[i]);
      const double g3 = 3.0 * eps * (v - 0.5 * c * eps);
      if (!(g3 > 0.0)) return probe;  // degenerate tangential crossing
      acc += kGl8Weight[i] * clock_rate(g3);
    }
    clock += 0.5 * (eps_hi - eps_lo) * acc;
    probe.clock_reached = clock;
    eps_hi = eps_lo;
    if (clock > clock_target) {
      probe.reached_target = true;
      probe.eps_at_target = eps_hi;
      break;
    }
  }
  return probe;
}

}  // namespace widthsde::timechange
