#pragma once

// Small statistical helpers shared by the ergodic and verification modules
// and by the test suites.

#include <Eigen/Dense>

namespace widthsde::stats {

double mean(const Eigen::ArrayXd& v);
double variance(const Eigen::ArrayXd& v);  // unbiased

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;  // Newey-West standard error when lag > 0
  Eigen::ArrayXd residuals;
};

// OLS of y on (1, t) with a Bartlett-kernel HAC variance for the slope.
OlsFit ols_newey_west(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y,
                      int lag);

// Jarque-Bera normality statistic; chi^2(2) 1% critical value is 9.210.
double jarque_bera(const Eigen::ArrayXd& v);

// Two-sample Kolmogorov-Smirnov distance between weighted empirical CDFs,
// with the effective sample sizes (sum w)^2 / sum w^2 of each side.
struct WeightedKs {
  double statistic = 0.0;
  double ess_a = 0.0;
  double ess_b = 0.0;
  // Threshold at significance alpha using the asymptotic two-sample form
  // with effective sample sizes.
  double threshold(double alpha) const;
};
WeightedKs ks_weighted(const Eigen::ArrayXd& values_a,
                       const Eigen::ArrayXd& weights_a,
                       const Eigen::ArrayXd& values_b,
                       const Eigen::ArrayXd& weights_b);

}  // namespace widthsde::stats
