#include "tickms/calibrate.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "tickms/dcmm.hpp"
#include "tickms/ingest.hpp"
#include "tickms/rng.hpp"
#include "tickms/simulate.hpp"

using namespace tickms;

namespace {

TickSeries series_from(const std::vector<int>& spreads, const std::vector<int>& returns) {
  std::vector<SpreadState> s;
  std::vector<Return> r;
  for (int v : spreads) s.push_back(SpreadState(v));
  for (int v : returns) r.push_back(Return(v));
  return TickSeries::single_segment(s, r);
}

// Reference fit of the 40-row dataset below, computed with an independent
// logistic regression implementation (Newton optimizer, observed-information
// standard errors). The C++ fit must reproduce it.
constexpr double kRefAlpha = -3.103280408531;
constexpr double kRefBeta1 = 1.604973659675;
constexpr double kRefBeta2 = -0.191475261495;
constexpr double kRefSeAlpha = 0.867915058000;
constexpr double kRefSeBeta1 = 0.508048709865;
constexpr double kRefSeBeta2 = 0.542148990777;
constexpr double kRefLogLik = -9.225465806221;

constexpr int kLag1[] = {0, 4, 1, 0, 0, 4, 0, 1, 4, 0, 0, 0, 1, 4, 0, 1, 0, 0, 4, 0,
                         1, 0, 4, 0, 0, 1, 0, 4, 0, 0, 1, 4, 0, 0, 0, 1, 0, 4, 1, 0};
constexpr int kLag2[] = {4, 0, 0, 1, 0, 0, 4, 0, 1, 0, 4, 0, 0, 1, 0, 0, 4, 1, 0, 0,
                         0, 4, 1, 0, 0, 0, 1, 4, 0, 1, 0, 0, 4, 0, 1, 0, 0, 4, 0, 1};
constexpr int kOutcome[] = {0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 0,
                            0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0};

void reference_dataset(std::vector<BinaryMove>& binary,
                       std::vector<SquaredReturnWindow>& windows) {
  for (int i = 0; i < 40; ++i) {
    binary.push_back(BinaryMove(kOutcome[i]));
    windows.push_back(SquaredReturnWindow({kLag2[i], kLag1[i]}));
  }
}

std::vector<double> table_coefficients(int p) {
  std::vector<double> beta = {-1.56e-1, -4.03e-2, 2.18e-2, 4.58e-2, 7.13e-2,
                              7.59e-2,  5.94e-2,  6.06e-2, 5.94e-2, 5.58e-2,
                              5.69e-2,  4.14e-2,  5.79e-2, 5.17e-2, 4.18e-2,
                              3.76e-2,  4.86e-2,  5.11e-2, 3.52e-2, 2.96e-2,
                              3.92e-2,  2.51e-2,  2.70e-2, 3.50e-2, 2.32e-2};
    for (int i = 26; i <= p; ++i) {
    beta.push_back(0.0232 * std::pow(static_cast<double>(i) / 25.0, -0.626));
  }
  beta.resize(static_cast<std::size_t>(p));
  return beta;
}

// Synthetic regime-1 sample: window entries drawn independently with the
// squared-return frequencies of the fitted order-1 model, outcome drawn from
// the logistic mean of the generating coefficients.
void synthetic_sample(std::uint64_t seed, std::size_t n, double alpha,
                      const std::vector<double>& beta, std::vector<BinaryMove>& binary,
                      std::vector<SquaredReturnWindow>& windows) {
  const int p = static_cast<int>(beta.size());
  rng::Xoshiro256pp gen(seed);
  binary.reserve(n);
  windows.reserve(n);
  std::vector<int> values(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i) {
    double linear = alpha;
    for (int lag = 1; lag <= p; ++lag) {
      const double u = gen.uniform01();
      const int r2 = u < 0.043571751363 ? 4 : (u < 0.129807252242 ? 1 : 0);
      values[static_cast<std::size_t>(p - lag)] = r2;
      linear += beta[static_cast<std::size_t>(lag - 1)] * r2;
    }
    const double mean = 1.0 / (1.0 + std::exp(-linear));
    binary.push_back(BinaryMove(gen.uniform01() < mean ? 1 : 0));
    windows.push_back(SquaredReturnWindow(values));
  }
}

}  // namespace

TEST_SUITE_BEGIN("calibrate");

TEST_CASE("count estimates are exact on a hand-built series") {
  // pairs: (1,1) r=0, (1,2) r=+1, (2,1) r=-1
  const CountEstimates est = estimate_counts(series_from({1, 1, 2, 1}, {0, 1, -1}));
  CHECK(est.n1 == 3);
  CHECK(est.n_spread == 4);
  CHECK(est.n11 == 1);
  CHECK(est.n12 == 1);
  CHECK(est.n21 == 1);
  CHECK(est.n22 == 0);
  CHECK(*est.pi1_hat == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(*est.p11_hat == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(*est.p21_hat == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*est.p11_se == doctest::Approx(std::sqrt(0.25 / 2.0)).epsilon(1e-12));
  CHECK(*est.p21_se == 0.0);
  CHECK(est.total_regime1 == 1);
  CHECK(est.zeros_regime1 == 1);
  CHECK(*est.theta1_hat == 0.0);
  CHECK(*est.theta1_se == 0.0);
  CHECK(est.total_regime4 == 0);
  CHECK_FALSE(est.theta4_hat.has_value());
  CHECK_FALSE(est.theta4_se.has_value());
  CHECK_FALSE(est.symmetry_regime1.z.has_value());
  CHECK_FALSE(est.symmetry_regime1.flagged);
}

TEST_CASE("constant spread pins the diagonal and leaves the other row undefined") {
  const CountEstimates est =
      estimate_counts(series_from({1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0}));
  CHECK(*est.pi1_hat == 1.0);
  CHECK(*est.p11_hat == 1.0);
  CHECK(*est.p11_se == 0.0);
  CHECK_FALSE(est.p21_hat.has_value());
  CHECK_FALSE(est.p21_se.has_value());
  CHECK(*est.theta1_hat == 0.0);
  CHECK_FALSE(est.theta4_hat.has_value());
}

TEST_CASE("empty series is rejected") {
  CHECK_THROWS_AS(estimate_counts(TickSeries{}), std::invalid_argument);
}

TEST_CASE("two-tick counts feed the theta estimates and the symmetry check") {
  // Regime-1 returns: six +2, six -2, twelve 0 -> theta1 = 0.25, z = 0.
  std::vector<int> spreads{1};
  std::vector<int> returns;
  for (int i = 0; i < 6; ++i) {
    returns.insert(returns.end(), {2, 0, -2, 0});
    spreads.insert(spreads.end(), {1, 1, 1, 1});
  }
  const CountEstimates balanced = estimate_counts(series_from(spreads, returns));
  CHECK(balanced.total_regime1 == 24);
  CHECK(balanced.zeros_regime1 == 12);
  CHECK(*balanced.theta1_hat == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(*balanced.theta1_se ==
        doctest::Approx(std::sqrt(0.5 * 0.5 / 24.0) / 2.0).epsilon(1e-12));
  CHECK(balanced.symmetry_regime1.plus_two == 6);
  CHECK(balanced.symmetry_regime1.minus_two == 6);
  CHECK(*balanced.symmetry_regime1.z == 0.0);
  CHECK_FALSE(balanced.symmetry_regime1.flagged);

  // Same zero share, all jumps positive -> same theta1, flagged imbalance.
  std::vector<int> skew_spreads{1};
  std::vector<int> skew_returns;
  for (int i = 0; i < 12; ++i) {
    skew_returns.insert(skew_returns.end(), {2, 0});
    skew_spreads.insert(skew_spreads.end(), {1, 1});
  }
  const CountEstimates skewed = estimate_counts(series_from(skew_spreads, skew_returns));
  CHECK(*skewed.theta1_hat == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(skewed.symmetry_regime1.plus_two == 12);
  CHECK(skewed.symmetry_regime1.minus_two == 0);
  CHECK(*skewed.symmetry_regime1.z == doctest::Approx(std::sqrt(12.0)).epsilon(1e-12));
  CHECK(skewed.symmetry_regime1.flagged);
}

TEST_CASE("counts accumulate across segments without bridging the gap") {
  TickSeries series = series_from({1, 2}, {1});
  const TickSeries other = series_from({2, 2}, {0});
  series.segments.push_back(other.segments[0]);
  const CountEstimates est = estimate_counts(series);
  CHECK(est.n_spread == 4);
  CHECK(est.n1 == 1);
  CHECK(est.n12 == 1);
  CHECK(est.n22 == 1);
  // the segment boundary (2)->(2) pair is not counted
  CHECK(est.n11 + est.n12 + est.n21 + est.n22 == 2);
  CHECK(est.total_regime4 == 1);
}

TEST_CASE("simulated switching path returns the generating parameters") {
  SimConfig config;
  config.model = Model::Ms;
  MsParams params;
  params.chain = SpreadChainParams::markov(0.953, 0.522);
  params.theta1 = 4.81e-2;
  params.theta4 = 1.51e-3;
  config.params = params;
  config.length = 1'000'000;
  config.seed = 923;
  const SimPath path = simulate_path(config);
  const CountEstimates est =
      estimate_counts(TickSeries::single_segment(path.spreads, path.returns));

  CHECK(std::abs(*est.p11_hat - 0.953) < 0.005);
  const double pi1 = params.chain.spread_stationary()[0];
  CHECK(std::abs(*est.pi1_hat - pi1) < 3.0 * *est.pi1_se);
  CHECK(std::abs(*est.p11_hat - 0.953) < 3.0 * *est.p11_se);
  CHECK(std::abs(*est.p21_hat - 0.522) < 3.0 * *est.p21_se);
  CHECK(std::abs(*est.theta1_hat - 4.81e-2) < 3.0 * *est.theta1_se);
  CHECK(std::abs(*est.theta4_hat - 1.51e-3) < 3.0 * *est.theta4_se);
  CHECK_FALSE(est.symmetry_regime1.flagged);
  CHECK_FALSE(est.symmetry_regime4.flagged);
}

TEST_CASE("logit sample extraction keeps windows inside segments") {
  // transitions: x=1 r=0, x=1 r=+2, x=2 r=+1, x=3 r=-1, x=1 r=0
  const TickSeries series = series_from({1, 1, 1, 2, 1, 1}, {0, 2, 1, -1, 0});
  const LogitSample order2 = logit_sample(series, 2);
  REQUIRE(order2.binary.size() == 1);
  CHECK(order2.binary[0].value() == 0);
  CHECK(order2.windows[0].at_lag(1) == 1);  // r(t-1) = -1
  CHECK(order2.windows[0].at_lag(2) == 1);  // r(t-2) = +1

  const LogitSample order0 = logit_sample(series, 0);
  REQUIRE(order0.binary.size() == 3);
  CHECK(order0.binary[0].value() == 0);
  CHECK(order0.binary[1].value() == 1);
  CHECK(order0.binary[2].value() == 0);

  // a second segment restarts the window; its first p returns are unusable
  TickSeries split = series_from({1, 1, 1}, {0, 0});
  split.segments.push_back(series_from({1, 1, 1}, {2, 0}).segments[0]);
  const LogitSample spanning = logit_sample(split, 2);
  CHECK(spanning.binary.empty());
}

TEST_CASE("coefficients survive the full path round trip") {
  DcmmParams params;
  params.chain = SpreadChainParams::markov(0.953, 0.522);
  params.p = 2;
  params.alpha1 = -2.921;
  params.beta1 = {-0.156, -4.03e-2};
  params.theta4 = 1.51e-3;
  SimConfig config;
  config.model = Model::Dcmm;
  config.params = params;
  config.length = 400'000;
  config.seed = 944;
  const SimPath path = simulate_path(config);
  const LogitSample sample =
      logit_sample(TickSeries::single_segment(path.spreads, path.returns), 2);
  REQUIRE(sample.binary.size() > 300'000);
  const LogitFit fit = fit_logit_irls(sample.binary, sample.windows, 2);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.alpha1 - params.alpha1) < 3.0 * fit.std_errors[0]);
  CHECK(std::abs(fit.beta1[0] - params.beta1[0]) < 3.0 * fit.std_errors[1]);
  CHECK(std::abs(fit.beta1[1] - params.beta1[1]) < 3.0 * fit.std_errors[2]);
}

TEST_CASE("logit fit reproduces the reference implementation") {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  reference_dataset(binary, windows);
  const LogitFit fit = fit_logit_irls(binary, windows, 2);
  REQUIRE(fit.converged);
  CHECK(fit.iterations < 100);
  CHECK(fit.diagnostic.empty());
  CHECK(fit.alpha1 == doctest::Approx(kRefAlpha).epsilon(1e-9));
  CHECK(fit.beta1[0] == doctest::Approx(kRefBeta1).epsilon(1e-9));
  CHECK(fit.beta1[1] == doctest::Approx(kRefBeta2).epsilon(1e-9));
  CHECK(fit.std_errors[0] == doctest::Approx(kRefSeAlpha).epsilon(1e-8));
  CHECK(fit.std_errors[1] == doctest::Approx(kRefSeBeta1).epsilon(1e-8));
  CHECK(fit.std_errors[2] == doctest::Approx(kRefSeBeta2).epsilon(1e-8));
  CHECK(fit.log_likelihood == doctest::Approx(kRefLogLik).epsilon(1e-10));
  for (int j = 0; j < 3; ++j) {
    const double estimate = j == 0 ? fit.alpha1 : fit.beta1[j - 1];
    CHECK(fit.z_values[j] == doctest::Approx(estimate / fit.std_errors[j]).epsilon(1e-12));
  }
}

TEST_CASE("intercept-only fit matches the sample frequency") {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  reference_dataset(binary, windows);
  const LogitFit fit = fit_logit_irls(binary, windows, 0);
  REQUIRE(fit.converged);
  CHECK(fit.beta1.empty());
  CHECK(fit.std_errors.size() == 1);
  const double fitted = 1.0 / (1.0 + std::exp(-fit.alpha1));
  CHECK(std::abs(fitted - 0.275) < 1e-8);
}

TEST_CASE("logit fit validates its inputs") {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  reference_dataset(binary, windows);
  SUBCASE("misaligned sequences") {
    binary.pop_back();
    CHECK_THROWS_AS(fit_logit_irls(binary, windows, 2), std::invalid_argument);
  }
  SUBCASE("too short for the order") {
    binary.erase(binary.begin() + 30, binary.end());
    windows.erase(windows.begin() + 30, windows.end());
    CHECK_THROWS_AS(fit_logit_irls(binary, windows, 2), std::invalid_argument);
  }
  SUBCASE("window shorter than the order") {
    reference_dataset(binary, windows);  // 80 rows, above the length floor for p=3
    CHECK_THROWS_AS(fit_logit_irls(binary, windows, 3), std::invalid_argument);
  }
  SUBCASE("negative order") {
    CHECK_THROWS_AS(fit_logit_irls(binary, windows, -1), std::invalid_argument);
  }
}

TEST_CASE("null coefficients are recovered as noise around zero") {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  synthetic_sample(20240417, 30'000, -0.847297860387, {0.0, 0.0, 0.0}, binary, windows);
  const LogitFit fit = fit_logit_irls(binary, windows, 3);
  REQUIRE(fit.converged);
  for (int j = 1; j <= 3; ++j) {
    CHECK(std::abs(fit.beta1[j - 1]) < 3.0 * fit.std_errors[j]);
  }
}

TEST_CASE("synthetic regime-one data returns the generating coefficients") {
  const std::vector<double> beta = table_coefficients(25);
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  synthetic_sample(903, 1'000'000, -2.921, beta, binary, windows);
  const LogitFit fit = fit_logit_irls(binary, windows, 25);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.alpha1 - (-2.921)) < 3.0 * fit.std_errors[0]);
  for (int j = 1; j <= 25; ++j) {
    CHECK(std::abs(fit.beta1[j - 1] - beta[j - 1]) < 3.0 * fit.std_errors[j]);
  }
}

TEST_CASE("recovered coefficient magnitudes follow the generating decay") {
  const std::vector<double> beta = table_coefficients(50);
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  synthetic_sample(911, 1'000'000, -2.921, beta, binary, windows);
  const LogitFit fit = fit_logit_irls(binary, windows, 50);
  REQUIRE(fit.converged);
  std::vector<double> magnitudes;
  std::vector<long> lags;
  for (int i = 1; i <= 50; ++i) {
    magnitudes.push_back(std::abs(fit.beta1[i - 1]));
    lags.push_back(i);
  }
  const PowerLawFit decay = fit_power_law(magnitudes, lags, {3, 50});
  CHECK(decay.n_points == 48);
  CHECK(decay.excluded == 0);
  CHECK(std::abs(decay.exponent - 0.626) < 0.15);
}

TEST_CASE("perfect separation is reported instead of diverging") {
  std::vector<BinaryMove> binary;
  std::vector<SquaredReturnWindow> windows;
  for (int i = 0; i < 30; ++i) {
    binary.push_back(BinaryMove(1));
    windows.push_back(SquaredReturnWindow({4}));
    binary.push_back(BinaryMove(0));
    windows.push_back(SquaredReturnWindow({0}));
  }
  const LogitFit fit = fit_logit_irls(binary, windows, 1);
  CHECK_FALSE(fit.converged);
  CHECK(fit.diagnostic.find("separation") != std::string::npos);
  CHECK(fit.iterations <= 100);
}

TEST_CASE("power law fit is exact on exact data") {
  std::vector<double> values;
  std::vector<long> indices;
  for (long i = 1; i <= 60; ++i) {
    values.push_back(3.7 * std::pow(static_cast<double>(i), -0.626));
    indices.push_back(i);
  }
  const PowerLawFit fit = fit_power_law(values, indices, {1, 60});
  CHECK(std::abs(fit.exponent - 0.626) < 1e-10);
  CHECK(fit.exponent_se < 1e-12);
  CHECK(fit.n_points == 60);
  CHECK(fit.range.first == 1);
  CHECK(fit.range.second == 60);
}

TEST_CASE("power law fit windows and filters its input") {
  std::vector<double> values{1.0, 0.5, -1.0, 0.25, 0.0, 0.125, 0.1};
  std::vector<long> indices{1, 2, 3, 4, 5, 6, 7};
  const PowerLawFit fit = fit_power_law(values, indices, {2, 7});
  // indices 3 and 5 carry non-positive values, index 1 is outside the window
  CHECK(fit.n_points == 4);
  CHECK(fit.excluded == 2);

  SUBCASE("fewer than three usable points") {
    CHECK_THROWS_AS(fit_power_law(values, indices, {2, 4}), std::invalid_argument);
  }
  SUBCASE("degenerate window") {
    CHECK_THROWS_AS(fit_power_law(values, indices, {4, 4}), std::invalid_argument);
  }
  SUBCASE("misaligned lengths") {
    values.pop_back();
    CHECK_THROWS_AS(fit_power_law(values, indices, {2, 7}), std::invalid_argument);
  }
  SUBCASE("non-positive index") {
    indices[0] = 0;
    CHECK_THROWS_AS(fit_power_law(values, indices, {2, 7}), std::invalid_argument);
  }
}

TEST_CASE("significance stars switch at the two-sided normal levels") {
  CHECK(significance_stars(3.30) == "***");
  CHECK(significance_stars(-3.30) == "***");
  CHECK(significance_stars(3.29) == "**");
  CHECK(significance_stars(2.58) == "**");
  CHECK(significance_stars(2.57) == "*");
  CHECK(significance_stars(1.96) == "*");
  CHECK(significance_stars(-1.96) == "*");
  CHECK(significance_stars(1.95) == "");
  CHECK(significance_stars(0.0) == "");
}

TEST_SUITE_END();
