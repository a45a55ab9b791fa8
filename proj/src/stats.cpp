#include "widthsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "widthsde/errors.hpp"

namespace widthsde::stats {

double mean(const Eigen::ArrayXd& v) {
  if (v.size() == 0) throw InsufficientData("mean of empty sample");
  return v.mean();
}

double variance(const Eigen::ArrayXd& v) {
  if (v.size() < 2) throw InsufficientData("variance needs >= 2 samples");
  const double m = v.mean();
  return (v - m).square().sum() / static_cast<double>(v.size() - 1);
}

OlsFit ols_newey_west(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y,
                      int lag) {
  const Eigen::Index n = t.size();
  if (n < 3 || y.size() != n)
    throw InsufficientData("ols_newey_west: need >= 3 matching points");

  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  x.col(1) = t.matrix();
  const Eigen::Matrix2d xtx = x.transpose() * x;
  const Eigen::Matrix2d xtx_inv = xtx.inverse();
  const Eigen::Vector2d beta = xtx_inv * (x.transpose() * y.matrix());

  OlsFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  fit.residuals = (y.matrix() - x * beta).array();

  // Bartlett-weighted HAC meat: sum_i g_i g_i' + sum_l w_l sum_i
  // (g_i g_{i-l}' + g_{i-l} g_i') with g_i = x_i * u_i.
  const int max_lag = std::min<int>(lag, static_cast<int>(n) - 1);
  Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d g = x.row(i).transpose() * fit.residuals(i);
    meat += g * g.transpose();
  }
  for (int l = 1; l <= max_lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (max_lag + 1.0);
    for (Eigen::Index i = l; i < n; ++i) {
      const Eigen::Vector2d gi = x.row(i).transpose() * fit.residuals(i);
      const Eigen::Vector2d gl = x.row(i - l).transpose() * fit.residuals(i - l);
      const Eigen::Matrix2d cross = gi * gl.transpose();
      meat += w * (cross + cross.transpose());
    }
  }
  const Eigen::Matrix2d cov = xtx_inv * meat * xtx_inv;
  fit.slope_se = std::sqrt(std::max(0.0, cov(1, 1)));
  return fit;
}

double jarque_bera(const Eigen::ArrayXd& v) {
  const Eigen::Index n = v.size();
  if (n < 8) throw InsufficientData("jarque_bera: need >= 8 samples");
  const double m = v.mean();
  const Eigen::ArrayXd c = v - m;
  const double m2 = c.square().mean();
  const double m3 = c.cube().mean();
  const double m4 = c.square().square().mean();
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  return static_cast<double>(n) *
         (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
}

double WeightedKs::threshold(double alpha) const {
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt((ess_a + ess_b) / (ess_a * ess_b));
}

WeightedKs ks_weighted(const Eigen::ArrayXd& values_a,
                       const Eigen::ArrayXd& weights_a,
                       const Eigen::ArrayXd& values_b,
                       const Eigen::ArrayXd& weights_b) {
  if (values_a.size() == 0 || values_b.size() == 0 ||
      values_a.size() != weights_a.size() ||
      values_b.size() != weights_b.size())
    throw InsufficientData("ks_weighted: empty or mismatched samples");

  auto order = [](const Eigen::ArrayXd& v) {
    std::vector<Eigen::Index> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index i, Eigen::Index j) { return v(i) < v(j); });
    return idx;
  };
  const auto ia = order(values_a);
  const auto ib = order(values_b);
  const double wa_total = weights_a.sum();
  const double wb_total = weights_b.sum();

  WeightedKs ks;
  ks.ess_a = wa_total * wa_total / weights_a.square().sum();
  ks.ess_b = wb_total * wb_total / weights_b.square().sum();

  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  while (i < ia.size() || j < ib.size()) {
    const double va =
        i < ia.size() ? values_a(ia[i]) : std::numeric_limits<double>::infinity();
    const double vb =
        j < ib.size() ? values_b(ib[j]) : std::numeric_limits<double>::infinity();
    const double v = std::min(va, vb);
    while (i < ia.size() && values_a(ia[i]) <= v) fa += weights_a(ia[i++]);
    while (j < ib.size() && values_b(ib[j]) <= v) fb += weights_b(ib[j++]);
    ks.statistic =
        std::max(ks.statistic, std::abs(fa / wa_total - fb / wb_total));
  }
  return ks;
}

}  // namespace widthsde::stats
