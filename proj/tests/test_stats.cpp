#include "tickms/stats.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "tickms/ms_model.hpp"
#include "tickms/rng.hpp"
#include "tickms/simulate.hpp"

using namespace tickms;

namespace {

MsParams high_activity() {
  MsParams params;
  params.chain = SpreadChainParams::markov(0.953, 0.522);
  params.theta1 = 4.81e-2;
  params.theta4 = 1.51e-3;
  return params;
}

constexpr double kExcessKurtHigh = 5.008295620588;

SimPath high_activity_path(std::size_t length, std::uint64_t seed) {
  SimConfig config;
  config.model = Model::Ms;
  config.params = high_activity();
  config.length = length;
  config.seed = seed;
  return simulate_path(config);
}

std::vector<Return> to_returns(const std::vector<int>& values) {
  std::vector<Return> out;
  out.reserve(values.size());
  for (const int v : values) out.push_back(Return(v));
  return out;
}

std::vector<double> squared_series(const SimPath& path) {
  std::vector<double> out;
  out.reserve(path.returns.size());
  for (const auto& r : path.returns) {
    const double v = r.half_ticks();
    out.push_back(v * v);
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("acf estimator fixes lag zero at one and fills the noise band") {
  std::vector<double> series;
  rng::SplitMix64 gen(7);
  for (int i = 0; i < 200; ++i) series.push_back(gen.uniform01());

  const auto acf = sample_acf(series, 10);
  REQUIRE(acf.lags.size() == 11);
  REQUIRE(acf.values.size() == 11);
  CHECK(acf.lags.front() == 0);
  CHECK(acf.values.front() == 1.0);
  CHECK(acf.lags.back() == 10);
  CHECK(acf.n == 200);
  CHECK(acf.noise_band == doctest::Approx(2.0 / std::sqrt(200.0)).epsilon(1e-15));
  CHECK(sample_acf(series, 10, 4.0).noise_band ==
        doctest::Approx(4.0 / std::sqrt(200.0)).epsilon(1e-15));
  for (const double v : acf.values) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
}

TEST_CASE("acf estimator rejects degenerate input") {
  const std::vector<double> constant(50, 3.25);
  CHECK_THROWS_AS(sample_acf(constant, 5), std::domain_error);

  const std::vector<double> tiny = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(sample_acf(tiny, 2), std::invalid_argument);
  CHECK_THROWS_AS(sample_acf(tiny, -1), std::invalid_argument);
  CHECK_NOTHROW(sample_acf(tiny, 1));
}

TEST_CASE("acf values stay within [-1, 1] on strongly trending input") {
  std::vector<double> trend;
  rng::SplitMix64 gen(11);
  double level = 0.0;
  for (int i = 0; i < 2000; ++i) {
    level += gen.uniform01() - 0.5;
    trend.push_back(level);
  }
  const auto acf = sample_acf(trend, 100);
  for (const double v : acf.values) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
  CHECK(acf.values[1] > 0.9);
}

TEST_CASE("white noise acf stays inside twice the noise band") {
  const std::size_t n = 100'000;
  std::vector<double> series;
  series.reserve(n);
  rng::SplitMix64 gen(20240411);
  for (std::size_t i = 0; i < n; ++i) series.push_back(gen.uniform01());

  const auto acf = sample_acf(series, 100);
  const double limit = 4.0 / std::sqrt(static_cast<double>(n));
  int inside = 0;
  for (std::size_t tau = 1; tau <= 100; ++tau) {
    inside += std::abs(acf.values[tau]) < limit ? 1 : 0;
  }
  CHECK(inside >= 99);
}

TEST_CASE("simulated squared returns match the analytic autocorrelation") {
  const auto path = high_activity_path(1'000'000, 20240412);
  const auto acf = sample_acf(squared_series(path), 10);
  const auto params = high_activity();
  const double se = 1.0 / std::sqrt(static_cast<double>(acf.n));
  for (const long tau : {1L, 2L, 3L, 5L, 10L}) {
    CHECK(std::abs(acf.values[static_cast<std::size_t>(tau)] - acf_squared(params, tau)) <
          3.0 * se);
  }
}

TEST_CASE("aggregation sums consecutive returns") {
  const auto returns = to_returns({1, 1, -2});
  CHECK(aggregate_returns(returns, 1) == std::vector<long>{1, 1, -2});
  CHECK(aggregate_returns(returns, 2) == std::vector<long>{2, -1});
  CHECK(aggregate_returns(returns, 2, false) == std::vector<long>{2});
  CHECK(aggregate_returns(returns, 1, false) == std::vector<long>{1, 1, -2});

  CHECK_THROWS_AS(aggregate_returns(returns, 0), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_returns(returns, 3), std::invalid_argument);
}

TEST_CASE("overlapping aggregation equals mid-price differences") {
  const auto path = high_activity_path(5000, 13);
  const auto n = path.returns.size();
  std::vector<long> cum(n + 1, 0);
  for (std::size_t t = 0; t < n; ++t) cum[t + 1] = cum[t] + path.returns[t].half_ticks();

  for (const long dt : {1L, 2L, 7L, 128L}) {
    const auto aggregated = aggregate_returns(path.returns, dt);
    REQUIRE(aggregated.size() == n - static_cast<std::size_t>(dt) + 1);
    for (std::size_t t = 0; t < aggregated.size(); ++t) {
      CHECK(aggregated[t] == cum[t + static_cast<std::size_t>(dt)] - cum[t]);
    }
    const auto blocks = aggregate_returns(path.returns, dt, false);
    REQUIRE(blocks.size() == n / static_cast<std::size_t>(dt));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto start = b * static_cast<std::size_t>(dt);
      CHECK(blocks[b] == cum[start + static_cast<std::size_t>(dt)] - cum[start]);
    }
  }
}

TEST_CASE("aggregate stats validate their input") {
  CHECK_THROWS_AS(aggregate_stats(to_returns({1, -1, 1}), 1), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_stats(to_returns(std::vector<int>(10, 0)), 1), std::domain_error);
  CHECK_THROWS_AS(excess_kurtosis({1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(excess_kurtosis({2.0, 2.0, 2.0, 2.0}), std::domain_error);
}

TEST_CASE("aggregate stats summarize moments and counts") {
  const auto returns = to_returns({2, 0, -2, 0, 2, 0, 0, -2});
  const auto stats = aggregate_stats(returns, 1);
  CHECK(stats.dt == 1);

  std::size_t total = 0;
  for (const auto& [bin, count] : stats.histogram) total += count;
  CHECK(total == returns.size());
  CHECK(stats.histogram.at(2) == 2);
  CHECK(stats.histogram.at(0) == 4);
  CHECK(stats.histogram.at(-2) == 2);

  // mean 0, variance 2, fourth moment 8: kappa = 8 / 4 - 3 = -1.
  CHECK(stats.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(stats.sigma_n == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(stats.kappa == doctest::Approx(-1.0).epsilon(1e-12));

  const auto wide = aggregate_stats(returns, 2);
  CHECK(wide.sigma_n == doctest::Approx(wide.sigma / std::sqrt(2.0)).epsilon(1e-12));
  std::size_t wide_total = 0;
  for (const auto& [bin, count] : wide.histogram) wide_total += count;
  CHECK(wide_total == returns.size() - 1);
}

TEST_CASE("gaussian synthetic input has no excess kurtosis") {
  const std::size_t n = 200'000;
  std::vector<double> normals;
  normals.reserve(n);
  rng::SplitMix64 gen(20240413);
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double u1 = gen.uniform01();
    const double u2 = gen.uniform01();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    normals.push_back(radius * std::cos(2.0 * std::numbers::pi * u2));
    normals.push_back(radius * std::sin(2.0 * std::numbers::pi * u2));
  }
  // SD of the kurtosis estimator for a Gaussian sample is sqrt(24 / n).
  CHECK(std::abs(excess_kurtosis(normals)) < 3.0 * std::sqrt(24.0 / static_cast<double>(n)));
}

TEST_CASE("aggregated histogram keeps odd bins locally dominated at dt = 128") {
  const auto path = high_activity_path(1'000'000, 20240410);
  const auto stats = aggregate_stats(path.returns, 128);

  std::size_t total = 0;
  for (const auto& [bin, count] : stats.histogram) total += count;
  CHECK(total == path.returns.size() - 127);

  auto count_at = [&](long bin) {
    const auto it = stats.histogram.find(bin);
    return it == stats.histogram.end() ? std::size_t{0} : it->second;
  };
  const long lo = stats.histogram.begin()->first;
  const long hi = stats.histogram.rbegin()->first;
  int odd_bins = 0;
  for (long k = lo; k <= hi; ++k) {
    if (((k % 2) + 2) % 2 != 1) continue;
    CHECK(count_at(k) < std::max(count_at(k - 1), count_at(k + 1)));
    ++odd_bins;
  }
  CHECK(odd_bins > 20);
}

TEST_CASE("ensemble statistics are diffusive with a kurtosis power law") {
  // 25 runs of 10^6 steps; per scale dt the ensemble records sigma_n and
  // kappa. The returns are serially uncorrelated, so sigma_n must stay flat,
  // while kappa decays close to 1/dt.
  const std::vector<long> dts = {1, 8, 16, 32, 64, 128, 256, 512};
  const int runs = 25;
  std::vector<std::vector<double>> sigma_n(dts.size());
  std::vector<std::vector<double>> kappa(dts.size());
  for (int run = 0; run < runs; ++run) {
    const auto path = high_activity_path(1'000'000, rng::derive_stream(20240414, run));
    for (std::size_t d = 0; d < dts.size(); ++d) {
      const auto stats = aggregate_stats(path.returns, dts[d]);
      sigma_n[d].push_back(stats.sigma_n);
      kappa[d].push_back(stats.kappa);
    }
  }

  auto mean_sd = [](const std::vector<double>& values) {
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, std::sqrt(ss / (values.size() - 1.0)));
  };

  const auto [sigma_base, sigma_base_sd] = mean_sd(sigma_n[0]);
  for (std::size_t d = 1; d < dts.size(); ++d) {
    const auto [mean, sd] = mean_sd(sigma_n[d]);
    CHECK(std::abs(mean - sigma_base) < 3.0 * sd / std::sqrt(static_cast<double>(runs)));
  }

  const auto [kappa_one, kappa_one_sd] = mean_sd(kappa[0]);
  CHECK(std::abs(kappa_one - 5.01) < 0.15);
  CHECK(std::abs(kappa_one - kExcessKurtHigh) < 0.15);

  // Log-log least squares over dt in [8, 512].
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  int points = 0;
  for (std::size_t d = 1; d < dts.size(); ++d) {
    const auto [mean, sd] = mean_sd(kappa[d]);
    REQUIRE(mean > 0.0);
    const double x = std::log(static_cast<double>(dts[d]));
    const double y = std::log(mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++points;
  }
  const double slope = (static_cast<double>(points) * sxy - sx * sy) /
                       (static_cast<double>(points) * sxx - sx * sx);
  CHECK(-slope > 0.85);
  CHECK(-slope < 1.15);
}

TEST_CASE("csv emitters write plottable tables") {
  std::vector<double> series;
  rng::SplitMix64 gen(3);
  for (int i = 0; i < 100; ++i) series.push_back(gen.uniform01());
  const auto acf = sample_acf(series, 3);

  std::ostringstream acf_out;
  write_acf_csv(acf, acf_out);
  std::istringstream acf_in(acf_out.str());
  std::string line;
  REQUIRE(std::getline(acf_in, line));
  CHECK(line == "lag,value,band");
  std::size_t rows = 0;
  while (std::getline(acf_in, line)) ++rows;
  CHECK(rows == 4);

  const auto stats = aggregate_stats(to_returns({2, 0, -2, 0, 1, -1, 0, 2}), 1);
  std::ostringstream hist_out;
  write_histogram_csv(stats.histogram, hist_out);
  std::istringstream hist_in(hist_out.str());
  REQUIRE(std::getline(hist_in, line));
  CHECK(line == "bin,count");
  long previous_bin = -100;
  rows = 0;
  while (std::getline(hist_in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    const long bin = std::stol(line.substr(0, comma));
    CHECK(bin > previous_bin);
    previous_bin = bin;
    ++rows;
  }
  CHECK(rows == stats.histogram.size());
}

TEST_SUITE_END();
