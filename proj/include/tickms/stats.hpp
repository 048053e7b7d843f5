#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "tickms/core.hpp"

namespace tickms {

// Sample autocorrelation estimate over lags 0..max_lag, with the flat noise
// band used to judge which lags are distinguishable from white noise.
struct AcfEstimate {
  std::vector<long> lags;
  std::vector<double> values;
  std::size_t n = 0;
  double noise_band = 0.0;
};

// Standard biased estimator
//   rho(tau) = sum_t (x_t - xbar)(x_{t+tau} - xbar) / sum_t (x_t - xbar)^2
// whose values always lie in [-1, 1] and equal 1 exactly at lag 0. The band
// is z / sqrt(n), z defaulting to the two-sigma level.
// Requires series length > max_lag + 1 and max_lag >= 0; throws
// std::domain_error on a zero-variance series.
AcfEstimate sample_acf(const std::vector<double>& series, long max_lag, double z = 2.0);

// Sums of dt consecutive half-tick returns, i.e. mid-price differences over a
// dt-transaction horizon. Overlapping windows slide by one step and yield
// n - dt + 1 values; non-overlapping windows tile the series and yield
// floor(n / dt) values. Requires dt >= 1 and length >= dt + 1.
std::vector<long> aggregate_returns(const std::vector<Return>& returns, long dt,
                                    bool overlapping = true);

// Scale-dt summary of aggregated returns. sigma_n is sigma / sqrt(dt), the
// quantity that stays flat for a diffusive model; kappa is the excess
// kurtosis central4 / sigma^4 - 3.
struct AggregateStats {
  long dt = 1;
  double sigma = 0.0;
  double sigma_n = 0.0;
  double kappa = 0.0;
  std::map<long, std::size_t> histogram;
};

// Throws std::invalid_argument with fewer than 4 aggregated observations and
// std::domain_error when the aggregated series has zero variance, which
// leaves the kurtosis undefined.
AggregateStats aggregate_stats(const std::vector<Return>& returns, long dt,
                               bool overlapping = true);

// The kurtosis estimator used by aggregate_stats, exposed for arbitrary real
// samples. Same preconditions: at least 4 observations, nonzero variance.
double excess_kurtosis(const std::vector<double>& values);

// CSV emitters for external plotting: "lag,value,band" and "bin,count".
void write_acf_csv(const AcfEstimate& acf, std::ostream& out);
void write_histogram_csv(const std::map<long, std::size_t>& histogram, std::ostream& out);

}  // namespace tickms
