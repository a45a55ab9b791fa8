#include "widthsde/profile.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "widthsde/errors.hpp"
#include "widthsde/spline.hpp"

namespace widthsde::profile {

namespace {

constexpr double kTruncationTol = 1e-12;
constexpr double kDivisorTol = 1e-14;

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1] by
// Newton iteration on the Legendre recurrence.
void legendre_rule(int n, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

constexpr int kPanelOrder = 16;

double composite_gl(const std::function<double(double)>& fn, double a,
                    double b, int n_nodes) {
  const int panels = std::max(1, (n_nodes + kPanelOrder - 1) / kPanelOrder);
  static thread_local std::vector<double> nodes, weights;
  if (nodes.size() != kPanelOrder) legendre_rule(kPanelOrder, nodes, weights);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < kPanelOrder; ++i)
      acc += weights[i] * fn(mid + 0.5 * h * nodes[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

double moment_integral(const ProfileSpec& prof, int m, int n, int p,
                       int n_nodes) {
  auto integrand = [&](double r) {
    double v = std::pow(r, m);
    if (n > 0) v *= std::pow(prof.f(r), n);
    if (p > 0) v *= std::pow(prof.df(r), p);
    return v;
  };
  return 2.0 * std::numbers::pi *
         composite_gl(integrand, 0.0, prof.r_max, n_nodes);
}

}  // namespace

double ProfileSpec::df(double r) const {
  if (f_prime) return f_prime(r);
  const double h = 1e-6 * std::max(1.0, r);
  return (f(r + h) - f(r - h)) / (2.0 * h);
}

void ProfileSpec::validate() const {
  if (!f) throw ConfigError("profile: no radial function supplied");
  if (quad_n < 16) throw ConfigError("profile: quad_n must be >= 16");
  if (!(r_max > 0.0)) throw ConfigError("profile: r_max must be > 0");
  for (int i = 0; i <= 64; ++i) {
    const double r = r_max * i / 64.0;
    if (f(r) < -kTruncationTol)
      throw ConfigError("profile: f must be nonnegative");
  }
  if (std::abs(f(r_max)) > kTruncationTol ||
      std::abs(df(r_max)) > kTruncationTol)
    throw ConfigError("profile: f and f' must vanish at r_max (tol 1e-12)");
}

ProfileSpec ProfileSpec::gaussian() {
  ProfileSpec p;
  p.f = [](double r) { return std::exp(-0.5 * r * r); };
  p.f_prime = [](double r) { return -r * std::exp(-0.5 * r * r); };
  p.r_max = 12.0;
  return p;
}

ProfileSpec ProfileSpec::sech2() {
  ProfileSpec p;
  p.f = [](double r) {
    const double c = std::cosh(r);
    return 1.0 / (c * c);
  };
  p.f_prime = [](double r) {
    const double c = std::cosh(r);
    return -2.0 * std::tanh(r) / (c * c);
  };
  p.r_max = 16.0;
  return p;
}

ProfileSpec ProfileSpec::named(const std::string& name) {
  if (name == "gaussian") return gaussian();
  if (name == "sech2") return sech2();
  throw ConfigError("profile: unknown built-in '" + name +
                    "' (expected gaussian or sech2)");
}

ProfileSpec ProfileSpec::from_samples(const Eigen::ArrayXd& r,
                                      const Eigen::ArrayXd& fr) {
  auto spline = std::make_shared<CubicSpline>(r, fr);
  ProfileSpec p;
  p.f = [spline](double x) { return (*spline)(x); };
  p.f_prime = [spline](double x) { return spline->derivative(x); };
  p.r_max = r(r.size() - 1);
  return p;
}

ProfileSpec ProfileSpec::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("profile: cannot open '" + path + "'");
  std::vector<double> rs, fs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double r, v;
    if (ss >> r >> v) {
      rs.push_back(r);
      fs.push_back(v);
    } else if (rs.empty()) {
      continue;  // header row
    } else {
      throw ConfigError("profile: malformed row in '" + path + "'");
    }
  }
  if (rs.size() < 3)
    throw ConfigError("profile: '" + path + "' has fewer than 3 samples");
  return from_samples(Eigen::Map<Eigen::ArrayXd>(rs.data(), rs.size()),
                      Eigen::Map<Eigen::ArrayXd>(fs.data(), fs.size()));
}

double gauss_legendre(const std::function<double(double)>& fn, double a,
                      double b, int n) {
  return composite_gl(fn, a, b, n);
}

ShapeCoefficients shape_coefficients(const ProfileSpec& profile) {
  profile.validate();
  constexpr int kIdx[5][3] = {
      {1, 2, 0}, {3, 2, 0}, {1, 0, 2}, {1, 4, 0}, {3, 2, 2}};
  ShapeCoefficients out;
  double* values[5] = {&out.c120, &out.c320, &out.c102, &out.c140, &out.c322};
  for (int k = 0; k < 5; ++k) {
    const double coarse = moment_integral(profile, kIdx[k][0], kIdx[k][1],
                                          kIdx[k][2], profile.quad_n);
    const double fine = moment_integral(profile, kIdx[k][0], kIdx[k][1],
                                        kIdx[k][2], 2 * profile.quad_n);
    *values[k] = fine;
    out.error_estimate[k] =
        std::abs(fine - coarse) + 1e-15 * std::abs(fine);
  }
  if (out.c120 <= kDivisorTol || out.c320 <= kDivisorTol)
    throw NonpositiveDivisorCoefficient(
        "shape_coefficients: c120 and c320 must be positive (degenerate "
        "profile)");
  return out;
}

SdeParams derive_params(const ShapeCoefficients& coeffs,
                        const PhysicalInputs& phys) {
  if (coeffs.c120 <= kDivisorTol || coeffs.c320 <= kDivisorTol)
    throw NonpositiveDivisorCoefficient(
        "derive_params: divisor coefficients must be positive");
  if (!(phys.lambda > 0.0) || !(phys.d_r > 0.0) || !(phys.mass > 0.0))
    throw InvalidPhysicalInput(
        "derive_params: lambda, d_r and mass must all be > 0");

  const double mass_sq = phys.mass * phys.mass;
  SdeParams p;
  p.delta = 4.0 / coeffs.c320 *
            (coeffs.c102 - mass_sq * coeffs.c140 / (2.0 * coeffs.c120));
  p.gamma = 8.0 * phys.lambda * mass_sq * coeffs.c322 /
            (coeffs.c120 * coeffs.c320);
  p.d = 32.0 * std::numbers::pi * std::numbers::pi * phys.d_r * coeffs.c322 /
        (coeffs.c320 * coeffs.c320);
  p.amp = phys.mass / std::sqrt(coeffs.c120);
  if (!(p.gamma > 0.0) || !(p.d > 0.0) || !(p.amp > 0.0))
    throw InvalidPhysicalInput(
        "derive_params: derived gamma, d, amp must be positive");
  return p;
}

std::complex<double> trial_wave(const ProfileSpec& profile, double amp,
                                double x, double xdot, double u_norm) {
  if (!(x > 0.0)) throw NonpositiveWidth("trial_wave: x must be > 0");
  const double modulus = amp / x * profile.f(u_norm / x);
  const double phase = xdot * u_norm * u_norm / (4.0 * x);
  return std::polar(modulus, phase);
}

double l2_mass(const ProfileSpec& profile, double amp) {
  profile.validate();
  auto integrand = [&](double r) {
    const double v = profile.f(r);
    return r * v * v;
  };
  return 2.0 * std::numbers::pi * amp * amp *
         composite_gl(integrand, 0.0, profile.r_max, profile.quad_n);
}

}  // namespace widthsde::profile
