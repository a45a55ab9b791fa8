#include "widthsde/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "widthsde/rng.hpp"

namespace widthsde::integrate {

namespace {

constexpr double kOverflowLimit = 1e12;

double tame(double drift, double dt) { return drift / (1.0 + dt * std::abs(drift)); }

struct Recorder {
  std::vector<double> times;
  std::vector<double> a, b;
  int stride;
  std::uint64_t count = 0;

  explicit Recorder(int record_stride) : stride(record_stride) {}

  void push(double t, double va, double vb, bool force = false) {
    if (force || count % stride == 0) {
      times.push_back(t);
      a.push_back(va);
      b.push_back(vb);
    }
    ++count;
  }

  void fill(PathSample& out) const {
    const Eigen::Index n = static_cast<Eigen::Index>(times.size());
    out.times = Eigen::Map<const Eigen::ArrayXd>(times.data(), n);
    out.states.resize(n, 2);
    out.states.col(0) = Eigen::Map<const Eigen::VectorXd>(a.data(), n);
    out.states.col(1) = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  }
};

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::euler_maruyama: return "euler_maruyama";
    case Scheme::tamed_euler: return "tamed_euler";
    case Scheme::adaptive_em: return "adaptive_em";
  }
  return "?";
}

const char* to_string(System s) {
  return s == System::original ? "original" : "transformed";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::step_blow_up: return "step_blow_up";
    case Termination::numerical_overflow: return "numerical_overflow";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw ConfigError("integrator: dt and t_end must be > 0");
  if (!(dt_min > 0.0) || dt_min > dt)
    throw ConfigError("integrator: need 0 < dt_min <= dt");
  if (!(x_floor > 0.0)) throw ConfigError("integrator: x_floor must be > 0");
  if (record_stride < 1)
    throw ConfigError("integrator: record_stride must be >= 1");
}

double adaptive_step(double x, const IntegratorConfig& cfg) {
  const double x2 = x * x;
  return std::clamp(cfg.dt * x2 * x2, cfg.dt_min, cfg.dt);
}

void visit_original(const model::HalfPlaneState& init,
                    const model::SdeParamsRef& p, const IntegratorConfig& cfg,
                    const StepVisitor& visit) {
  cfg.validate();
  if (!(init.x > 0.0))
    throw NonpositiveWidth("simulate_original: init.x must be > 0");

  const double noise_amp = std::sqrt(2.0 * p.d);
  double t = 0.0, x = init.x, y = init.y;
  std::uint64_t step = 0;
  while (t < cfg.t_end) {
    const double dt_k = cfg.scheme == Scheme::adaptive_em
                            ? std::min(adaptive_step(x, cfg), cfg.t_end - t)
                            : std::min(cfg.dt, cfg.t_end - t);
    const double x2 = x * x;
    const double x3 = x2 * x;
    const double x4 = x3 * x;
    double drift_y = p.delta / x3 - p.gamma * y / x4;
    if (cfg.scheme == Scheme::tamed_euler) drift_y = tame(drift_y, dt_k);
    const double dw =
        noise_amp == 0.0
            ? 0.0
            : rng::gaussian(cfg.seed, cfg.path_index, step) * std::sqrt(dt_k);
    // The x-equation carries no noise: its increment is exactly y_k dt_k.
    const double x_next = x + y * dt_k;
    const double y_next = y + drift_y * dt_k + noise_amp / x2 * dw;
    ++step;
    if (!(x_next > 0.0)) {
      visit(t, x, y, 0.0);  // signal truncation with dt = 0
      return;
    }
    t += dt_k;
    x = x_next;
    y = y_next;
    visit(t, x, y, dt_k);
  }
}

void visit_transformed(const model::TransformedState& init,
                       const model::SdeParamsRef& p,
                       const IntegratorConfig& cfg, const StepVisitor& visit) {
  cfg.validate();
  if (cfg.scheme == Scheme::adaptive_em)
    throw ConfigError(
        "simulate_transformed: adaptive_em is defined through the width x; "
        "use euler_maruyama or tamed_euler");

  const double noise_amp = std::sqrt(2.0 * p.d);
  double t = 0.0, xi = init.xi, eta = init.eta;
  std::uint64_t step = 0;
  while (t < cfg.t_end) {
    const double dt_k = std::min(cfg.dt, cfg.t_end - t);
    const double dw =
        noise_amp == 0.0
            ? 0.0
            : rng::gaussian(cfg.seed, cfg.path_index, step) * std::sqrt(dt_k);
    ++step;
    double xi_next, eta_next;
    if (xi == 0.0) {
      // The line {xi = 0} is invariant: eta diffuses freely, xi stays at
      // exactly zero with no round-off drift.
      xi_next = 0.0;
      eta_next = eta + noise_amp * dw;
    } else {
      const double xi3 = xi * xi * xi;
      const double xi4 = xi3 * xi;
      double a = -xi4 * eta;
      double b = p.delta * xi + 2.0 * xi3 * eta * eta - p.gamma * xi4 * eta;
      if (cfg.scheme == Scheme::tamed_euler) {
        a = tame(a, dt_k);
        b = tame(b, dt_k);
      }
      xi_next = xi + a * dt_k;
      eta_next = eta + b * dt_k + noise_amp * dw;
    }
    if (std::abs(xi_next) > kOverflowLimit ||
        std::abs(eta_next) > kOverflowLimit || !std::isfinite(xi_next) ||
        !std::isfinite(eta_next)) {
      visit(t, xi, eta, 0.0);
      return;
    }
    t += dt_k;
    xi = xi_next;
    eta = eta_next;
    visit(t, xi, eta, dt_k);
  }
}

PathSample simulate_original(const model::HalfPlaneState& init,
                             const model::SdeParamsRef& p,
                             const IntegratorConfig& cfg) {
  PathSample out;
  out.coordinate_system = System::original;
  out.min_x = init.x;
  Recorder rec(cfg.record_stride);
  rec.push(0.0, init.x, init.y, true);
  double last_t = 0.0, last_x = init.x, last_y = init.y;
  bool truncated = false;
  visit_original(init, p, cfg,
                 [&](double t, double x, double y, double dt_k) {
                   if (dt_k == 0.0) {
                     truncated = true;
                     return;
                   }
                   rec.push(t, x, y);
                   out.min_x = std::min(out.min_x, x);
                   if (x < cfg.x_floor) out.hit_floor = true;
                   last_t = t;
                   last_x = x;
                   last_y = y;
                 });
  if (!truncated && (rec.times.empty() || rec.times.back() != last_t))
    rec.push(last_t, last_x, last_y, true);
  rec.fill(out);
  out.termination =
      truncated ? Termination::step_blow_up : Termination::completed;
  out.steps_taken = rec.count;
  out.rng_fingerprint = rng::fingerprint(cfg.seed, cfg.path_index, rec.count);
  return out;
}

PathSample simulate_transformed(const model::TransformedState& init,
                                const model::SdeParamsRef& p,
                                const IntegratorConfig& cfg) {
  PathSample out;
  out.coordinate_system = System::transformed;
  out.min_x = init.xi > 0.0 ? 1.0 / init.xi
                            : std::numeric_limits<double>::infinity();
  Recorder rec(cfg.record_stride);
  rec.push(0.0, init.xi, init.eta, true);
  double last_t = 0.0, last_xi = init.xi, last_eta = init.eta;
  bool truncated = false;
  visit_transformed(init, p, cfg,
                    [&](double t, double xi, double eta, double dt_k) {
                      if (dt_k == 0.0) {
                        truncated = true;
                        return;
                      }
                      rec.push(t, xi, eta);
                      if (xi > 0.0) {
                        out.min_x = std::min(out.min_x, 1.0 / xi);
                        if (1.0 / xi < cfg.x_floor) out.hit_floor = true;
                      }
                      last_t = t;
                      last_xi = xi;
                      last_eta = eta;
                    });
  if (!truncated && (rec.times.empty() || rec.times.back() != last_t))
    rec.push(last_t, last_xi, last_eta, true);
  rec.fill(out);
  out.termination =
      truncated ? Termination::numerical_overflow : Termination::completed;
  out.steps_taken = rec.count;
  out.rng_fingerprint = rng::fingerprint(cfg.seed, cfg.path_index, rec.count);
  return out;
}

namespace {

// One Euler-Maruyama trajectory over [0, t_end] with prescribed Brownian
// increments on a uniform grid. Returns false when the path truncates.
bool em_with_increments(System system, const model::SdeParamsRef& p,
                        Eigen::Vector2d z, double dt,
                        const Eigen::ArrayXd& dw, Eigen::Vector2d& out) {
  const double noise_amp = std::sqrt(2.0 * p.d);
  for (Eigen::Index k = 0; k < dw.size(); ++k) {
    if (system == System::original) {
      const double x = z(0), y = z(1);
      if (!(x > 0.0)) return false;
      const double x2 = x * x;
      const double x3 = x2 * x;
      const double x4 = x3 * x;
      const double x_next = x + y * dt;
      const double y_next =
          y + (p.delta / x3 - p.gamma * y / x4) * dt + noise_amp / x2 * dw(k);
      if (!(x_next > 0.0)) return false;
      z = {x_next, y_next};
    } else {
      const double xi = z(0), eta = z(1);
      const double xi3 = xi * xi * xi;
      const double xi4 = xi3 * xi;
      const double xi_next = xi - xi4 * eta * dt;
      const double eta_next =
          eta +
          (p.delta * xi + 2.0 * xi3 * eta * eta - p.gamma * xi4 * eta) * dt +
          noise_amp * dw(k);
      if (std::abs(xi_next) > kOverflowLimit ||
          std::abs(eta_next) > kOverflowLimit)
        return false;
      z = {xi_next, eta_next};
    }
  }
  out = z;
  return true;
}

}  // namespace

StrongErrorResult strong_error_study(System system,
                                     const Eigen::Vector2d& init,
                                     const model::SdeParamsRef& p,
                                     const std::vector<double>& dt_list,
                                     int n_paths, std::uint64_t seed,
                                     double t_end) {
  if (dt_list.size() < 3)
    throw ConfigError("strong_error_study: need >= 3 step sizes");
  for (std::size_t i = 1; i < dt_list.size(); ++i) {
    if (!(dt_list[i] < dt_list[i - 1]))
      throw ConfigError("strong_error_study: dt_list must be decreasing");
    const double ratio = dt_list[i - 1] / dt_list[i];
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ConfigError(
          "strong_error_study: each dt must divide the next-coarser one");
  }
  if (n_paths < 2) throw ConfigError("strong_error_study: need >= 2 paths");

  const double dt_ref = dt_list.back() / 4.0;
  const auto n_ref = static_cast<Eigen::Index>(std::llround(t_end / dt_ref));
  if (std::abs(n_ref * dt_ref - t_end) > 1e-9 * t_end)
    throw ConfigError("strong_error_study: t_end must be a multiple of dt");

  const int levels = static_cast<int>(dt_list.size());
  std::vector<double> err_sum(levels, 0.0);
  int used = 0, dropped = 0;

  Eigen::ArrayXd dw_ref(n_ref);
  for (int path = 0; path < n_paths; ++path) {
    const double sqrt_dt = std::sqrt(dt_ref);
    for (Eigen::Index k = 0; k < n_ref; ++k)
      dw_ref(k) = rng::gaussian(seed, static_cast<std::uint64_t>(path),
                                static_cast<std::uint64_t>(k)) *
                  sqrt_dt;

    Eigen::Vector2d z_ref;
    bool ok = em_with_increments(system, p, init, dt_ref, dw_ref, z_ref);
    std::vector<Eigen::Vector2d> z_levels(levels);
    for (int l = 0; ok && l < levels; ++l) {
      const auto stride = static_cast<Eigen::Index>(
          std::llround(dt_list[l] / dt_ref));
      const Eigen::Index n_coarse = n_ref / stride;
      Eigen::ArrayXd dw(n_coarse);
      for (Eigen::Index k = 0; k < n_coarse; ++k)
        dw(k) = dw_ref.segment(k * stride, stride).sum();
      ok = em_with_increments(system, p, init, dt_list[l], dw, z_levels[l]);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    ++used;
    for (int l = 0; l < levels; ++l)
      err_sum[l] += (z_levels[l] - z_ref).norm();
  }
  if (used == 0)
    throw NumericalOverflow("strong_error_study: every coupled family truncated");

  StrongErrorResult res;
  res.n_paths = used;
  res.n_dropped = dropped;
  Eigen::ArrayXd lx(levels), ly(levels);
  for (int l = 0; l < levels; ++l) {
    const double e = err_sum[l] / used;
    res.errors.emplace_back(dt_list[l], e);
    lx(l) = std::log(dt_list[l]);
    ly(l) = std::log(e);
  }
  const double mx = lx.mean(), my = ly.mean();
  res.slope = ((lx - mx) * (ly - my)).sum() / (lx - mx).square().sum();
  return res;
}

PathSample rk4_ode(
    const std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>& field,
    const Eigen::Vector2d& init, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw ConfigError("rk4_ode: dt and t_end must be > 0");

  const auto n = static_cast<Eigen::Index>(std::ceil(t_end / dt - 1e-12));
  PathSample out;
  out.coordinate_system = System::original;
  out.times.resize(n + 1);
  out.states.resize(n + 1, 2);
  Eigen::Vector2d z = init;
  double t = 0.0;
  out.times(0) = 0.0;
  out.states.row(0) = z.transpose();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = std::min(dt, t_end - t);
    const Eigen::Vector2d k1 = field(t, z);
    const Eigen::Vector2d k2 = field(t + 0.5 * h, z + 0.5 * h * k1);
    const Eigen::Vector2d k3 = field(t + 0.5 * h, z + 0.5 * h * k2);
    const Eigen::Vector2d k4 = field(t + h, z + h * k3);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    if (!z.allFinite() || z.norm() > kOverflowLimit)
      throw NumericalOverflow("rk4_ode: state magnitude exceeded 1e12");
    out.times(k + 1) = t;
    out.states.row(k + 1) = z.transpose();
  }
  out.min_x = out.states.col(0).minCoeff();
  out.steps_taken = static_cast<std::uint64_t>(n);
  return out;
}

}  // namespace widthsde::integrate
