#include "tickms/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tickms {

double excess_kurtosis(const std::vector<double>& values) {
  const auto n = values.size();
  if (n < 4) throw std::invalid_argument("excess_kurtosis: need at least 4 observations");
  double mean = 0.0;
  for (const double x : values) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double x : values) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 == 0.0) throw std::domain_error("excess_kurtosis: zero variance");
  return m4 / (m2 * m2) - 3.0;
}

AcfEstimate sample_acf(const std::vector<double>& series, long max_lag, double z) {
  if (max_lag < 0) throw std::invalid_argument("sample_acf: max_lag must be non-negative");
  const auto n = series.size();
  if (n <= static_cast<std::size_t>(max_lag) + 1) {
    throw std::invalid_argument("sample_acf: series length must exceed max_lag + 1");
  }

  double mean = 0.0;
  for (const double x : series) mean += x;
  mean /= static_cast<double>(n);

  double denom = 0.0;
  for (const double x : series) denom += (x - mean) * (x - mean);
  if (denom == 0.0) throw std::domain_error("sample_acf: series has zero variance");

  AcfEstimate acf;
  acf.n = n;
  acf.noise_band = z / std::sqrt(static_cast<double>(n));
  acf.lags.reserve(static_cast<std::size_t>(max_lag) + 1);
  acf.values.reserve(static_cast<std::size_t>(max_lag) + 1);
  acf.lags.push_back(0);
  acf.values.push_back(1.0);
  for (long tau = 1; tau <= max_lag; ++tau) {
    double cov = 0.0;
    const auto t_end = n - static_cast<std::size_t>(tau);
    for (std::size_t t = 0; t < t_end; ++t) {
      cov += (series[t] - mean) * (series[t + static_cast<std::size_t>(tau)] - mean);
    }
    acf.lags.push_back(tau);
    acf.values.push_back(cov / denom);
  }
  return acf;
}

std::vector<long> aggregate_returns(const std::vector<Return>& returns, long dt,
                                    bool overlapping) {
  if (dt < 1) throw std::invalid_argument("aggregate_returns: dt must be at least 1");
  const auto n = returns.size();
  if (n < static_cast<std::size_t>(dt) + 1) {
    throw std::invalid_argument("aggregate_returns: series length must be at least dt + 1");
  }
  const auto width = static_cast<std::size_t>(dt);

  std::vector<long> out;
  if (overlapping) {
    out.reserve(n - width + 1);
    long window = 0;
    for (std::size_t t = 0; t < width; ++t) window += returns[t].half_ticks();
    out.push_back(window);
    for (std::size_t t = width; t < n; ++t) {
      window += returns[t].half_ticks() - returns[t - width].half_ticks();
      out.push_back(window);
    }
  } else {
    out.reserve(n / width);
    for (std::size_t b = 0; b + width <= n; b += width) {
      long window = 0;
      for (std::size_t t = b; t < b + width; ++t) window += returns[t].half_ticks();
      out.push_back(window);
    }
  }
  return out;
}

AggregateStats aggregate_stats(const std::vector<Return>& returns, long dt, bool overlapping) {
  const auto aggregated = aggregate_returns(returns, dt, overlapping);
  const auto m = aggregated.size();
  if (m < 4) {
    throw std::invalid_argument("aggregate_stats: need at least 4 aggregated observations, got " +
                                std::to_string(m));
  }

  AggregateStats stats;
  stats.dt = dt;
  std::vector<double> real;
  real.reserve(m);
  double mean = 0.0;
  long lo = aggregated.front();
  long hi = aggregated.front();
  for (const long v : aggregated) {
    real.push_back(static_cast<double>(v));
    mean += static_cast<double>(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(m);

  std::vector<std::size_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  double m2 = 0.0;
  for (const long v : aggregated) {
    const double d = static_cast<double>(v) - mean;
    m2 += d * d;
    counts[static_cast<std::size_t>(v - lo)] += 1;
  }
  m2 /= static_cast<double>(m);
  if (m2 == 0.0) throw std::domain_error("aggregate_stats: aggregated series has zero variance");
  for (long v = lo; v <= hi; ++v) {
    const auto count = counts[static_cast<std::size_t>(v - lo)];
    if (count > 0) stats.histogram.emplace(v, count);
  }
  stats.kappa = excess_kurtosis(real);

  stats.sigma = std::sqrt(m2);
  stats.sigma_n = stats.sigma / std::sqrt(static_cast<double>(dt));
  return stats;
}

void write_acf_csv(const AcfEstimate& acf, std::ostream& out) {
  out << "lag,value,band\n";
  for (std::size_t i = 0; i < acf.lags.size(); ++i) {
    out << acf.lags[i] << ',' << acf.values[i] << ',' << acf.noise_band << '\n';
  }
}

void write_histogram_csv(const std::map<long, std::size_t>& histogram, std::ostream& out) {
  out << "bin,count\n";
  for (const auto& [bin, count] : histogram) out << bin << ',' << count << '\n';
}

}  // namespace tickms
