#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tickms/core.hpp"
#include "tickms/dcmm.hpp"
#include "tickms/ingest.hpp"

namespace tickms {

// Imbalance between +2 and -2 returns within one constant-spread regime:
// z = (n_plus - n_minus) / sqrt(n_plus + n_minus), absent when no two-tick
// move was observed. flagged when |z| > 3.
struct SymmetryCheck {
  long plus_two = 0;
  long minus_two = 0;
  std::optional<double> z;
  bool flagged = false;
};

// Count-based estimates of the spread chain and of the two-tick move
// probabilities in the constant-spread regimes. An estimate and its standard
// error are absent together when the denominator count is zero; a missing
// estimate never reads as zero.
struct CountEstimates {
  long n1 = 0;        // spread observations equal to 1
  long n_spread = 0;  // all spread observations
  long n11 = 0, n12 = 0, n21 = 0, n22 = 0;    // consecutive spread pairs
  long zeros_regime1 = 0, total_regime1 = 0;  // zero returns / visits, x = 1
  long zeros_regime4 = 0, total_regime4 = 0;  // zero returns / visits, x = 4

  std::optional<double> pi1_hat, p11_hat, p21_hat;
  std::optional<double> theta1_hat, theta4_hat;
  // Binomial standard errors; theta errors are halved with the estimator.
  std::optional<double> pi1_se, p11_se, p21_se, theta1_se, theta4_se;

  SymmetryCheck symmetry_regime1, symmetry_regime4;
};

// Tallies spread pairs and regime returns across the segments of a series.
// pi1 = n1/n_spread, transition rows are normalized pair counts, and
// theta_k = (1 - zeros_k/total_k)/2 for the constant-spread regimes.
CountEstimates estimate_counts(const TickSeries& series);

// Logistic regression of binary moves on the past p squared returns.
// Coefficient order is intercept first, then lags 1..p.
struct LogitFit {
  double alpha1 = 0.0;
  std::vector<double> beta1;       // size p
  std::vector<double> std_errors;  // size p+1
  std::vector<double> z_values;    // size p+1
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;  // empty on clean convergence
};

// Regime-1 observations of a series prepared for the logit fit: each
// constant-narrow-spread return whose p predecessors lie inside the same
// segment contributes its binarized move and the window of the p preceding
// squared returns.
struct LogitSample {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
};

LogitSample logit_sample(const TickSeries& series, int p);

// Newton/IRLS maximizer of the Bernoulli log-likelihood with logistic mean.
// Row i regresses binary[i] on [1, windows[i].at_lag(1), ...,
// windows[i].at_lag(p)]. Inputs must be aligned and longer than 10*(p+1).
// Stops when max |score| < 1e-8 or the relative log-likelihood change falls
// below 1e-12, capped at 100 iterations; the step is halved until the
// log-likelihood is non-decreasing, and the information matrix falls back to
// a 1e-8 ridge when it cannot be factored. Perfect separation is reported
// through `converged` and `diagnostic` rather than diverging coefficients.
// Standard errors come from the inverse observed information at the optimum.
LogitFit fit_logit_irls(const std::vector<BinaryMove>& binary,
                        const std::vector<SquaredReturnWindow>& windows,
                        int p);

// Log-log least-squares fit of value ~ index^(-exponent) over an index
// window. Non-positive values inside the window are excluded and counted.
struct PowerLawFit {
  double exponent = 0.0;
  double exponent_se = 0.0;
  std::pair<long, long> range;  // requested (lo, hi) index window
  std::size_t n_points = 0;     // observations entering the regression
  std::size_t excluded = 0;     // in-window entries dropped as non-positive
};

PowerLawFit fit_power_law(const std::vector<double>& values,
                          const std::vector<long>& indices,
                          std::pair<long, long> window);

// Two-sided normal significance stars: "***" at the 0.001 level, "**" at
// 0.01, "*" at 0.05, empty otherwise.
std::string significance_stars(double z);

}  // namespace tickms
