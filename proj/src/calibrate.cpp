#include "tickms/calibrate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace tickms {

namespace {

std::optional<double> binomial_se(double p_hat, long n) {
  if (n <= 0) return std::nullopt;
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

void finish_symmetry(SymmetryCheck& check) {
  const long total = check.plus_two + check.minus_two;
  if (total == 0) return;
  check.z = static_cast<double>(check.plus_two - check.minus_two) /
            std::sqrt(static_cast<double>(total));
  check.flagged = std::abs(*check.z) > 3.0;
}

// logistic(z) without overflow on large |z|.
double logistic_stable(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow on large |z|.
double log1p_exp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

constexpr double kScoreTol = 1e-8;
constexpr double kRelLikTol = 1e-12;
constexpr double kRidge = 1e-8;
constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 50;
constexpr double kPinnedTol = 1e-8;

double log_likelihood_at(const Eigen::VectorXd& linear, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < linear.size(); ++i) {
    ll += y[i] * linear[i] - log1p_exp(linear[i]);
  }
  return ll;
}

}  // namespace

CountEstimates estimate_counts(const TickSeries& series) {
  series.validate();
  if (series.total_spreads() == 0) {
    throw std::invalid_argument("estimate_counts: series has no observations");
  }

  CountEstimates out;
  for (const auto& segment : series.segments) {
    for (std::size_t t = 0; t < segment.spreads.size(); ++t) {
      if (segment.spreads[t].ticks() == 1) ++out.n1;
      ++out.n_spread;
    }
    for (std::size_t t = 0; t < segment.returns.size(); ++t) {
      const SpreadState prev = segment.spreads[t];
      const SpreadState next = segment.spreads[t + 1];
      const TransitionState x = encode_transition(prev, next);
      const int r = segment.returns[t].half_ticks();
      if (prev.ticks() == 1) {
        (next.ticks() == 1 ? out.n11 : out.n12) += 1;
      } else {
        (next.ticks() == 1 ? out.n21 : out.n22) += 1;
      }
      if (x.value() == 1 || x.value() == 4) {
        const bool first = x.value() == 1;
        (first ? out.total_regime1 : out.total_regime4) += 1;
        if (r == 0) (first ? out.zeros_regime1 : out.zeros_regime4) += 1;
        SymmetryCheck& sym = first ? out.symmetry_regime1 : out.symmetry_regime4;
        if (r == 2) ++sym.plus_two;
        if (r == -2) ++sym.minus_two;
      }
    }
  }

  out.pi1_hat = static_cast<double>(out.n1) / static_cast<double>(out.n_spread);
  out.pi1_se = binomial_se(*out.pi1_hat, out.n_spread);
  if (const long row1 = out.n11 + out.n12; row1 > 0) {
    out.p11_hat = static_cast<double>(out.n11) / static_cast<double>(row1);
    out.p11_se = binomial_se(*out.p11_hat, row1);
  }
  if (const long row2 = out.n21 + out.n22; row2 > 0) {
    out.p21_hat = static_cast<double>(out.n21) / static_cast<double>(row2);
    out.p21_se = binomial_se(*out.p21_hat, row2);
  }
  if (out.total_regime1 > 0) {
    const double stay = static_cast<double>(out.zeros_regime1) /
                        static_cast<double>(out.total_regime1);
    out.theta1_hat = (1.0 - stay) / 2.0;
    out.theta1_se = *binomial_se(stay, out.total_regime1) / 2.0;
  }
  if (out.total_regime4 > 0) {
    const double stay = static_cast<double>(out.zeros_regime4) /
                        static_cast<double>(out.total_regime4);
    out.theta4_hat = (1.0 - stay) / 2.0;
    out.theta4_se = *binomial_se(stay, out.total_regime4) / 2.0;
  }
  finish_symmetry(out.symmetry_regime1);
  finish_symmetry(out.symmetry_regime4);
  return out;
}

LogitSample logit_sample(const TickSeries& series, int p) {
  if (p < 0) throw std::invalid_argument("logit_sample: order must be >= 0");
  series.validate();
  LogitSample sample;
  std::vector<int> values(static_cast<std::size_t>(p));
  for (const auto& segment : series.segments) {
    for (std::size_t t = static_cast<std::size_t>(p); t < segment.returns.size(); ++t) {
      const TransitionState x =
          encode_transition(segment.spreads[t], segment.spreads[t + 1]);
      if (x.value() != 1) continue;
      for (int lag = 1; lag <= p; ++lag) {
        const int r = segment.returns[t - static_cast<std::size_t>(lag)].half_ticks();
        values[static_cast<std::size_t>(p - lag)] = r * r;
      }
      sample.binary.push_back(binarize_return(segment.returns[t], x));
      sample.windows.push_back(SquaredReturnWindow(values));
    }
  }
  return sample;
}

LogitFit fit_logit_irls(const std::vector<BinaryMove>& binary,
                        const std::vector<SquaredReturnWindow>& windows,
                        int p) {
  if (p < 0) throw std::invalid_argument("fit_logit_irls: order must be >= 0");
  if (binary.size() != windows.size()) {
    throw std::invalid_argument("fit_logit_irls: inputs are not aligned");
  }
  const std::size_t n = binary.size();
  const std::size_t k = static_cast<std::size_t>(p) + 1;
  if (n <= 10 * k) {
    throw std::invalid_argument("fit_logit_irls: need more than 10*(p+1) observations");
  }

  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (windows[i].order() < p) {
      throw std::invalid_argument("fit_logit_irls: window shorter than the order");
    }
    x(i, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag) {
      x(i, lag) = static_cast<double>(windows[i].at_lag(lag));
    }
    y[i] = static_cast<double>(binary[i].value());
  }

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mean(n), weight(n);
  Eigen::MatrixXd info(k, k);
  double ll = log_likelihood_at(linear, y);

  LogitFit fit;
  fit.beta1.assign(static_cast<std::size_t>(p), 0.0);
  fit.std_errors.assign(k, std::numeric_limits<double>::quiet_NaN());
  fit.z_values.assign(k, std::numeric_limits<double>::quiet_NaN());

  // Only the lower triangle of `info` is filled; the LDLT factorizations
  // below read exactly that half.
  constexpr Eigen::Index kBlock = 8192;
  const auto accumulate_info = [&]() {
    info.setZero();
    Eigen::MatrixXd scaled;
    for (Eigen::Index start = 0; start < static_cast<Eigen::Index>(n); start += kBlock) {
      const Eigen::Index rows =
          std::min<Eigen::Index>(kBlock, static_cast<Eigen::Index>(n) - start);
      scaled = x.middleRows(start, rows);
      scaled.array().colwise() *= weight.segment(start, rows).array().sqrt();
      info.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    }
  };

  while (fit.iterations < kMaxIterations) {
    bool separated = true;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      mean[i] = logistic_stable(linear[i]);
      weight[i] = mean[i] * (1.0 - mean[i]);
      if (separated) {
        const bool pinned = y[i] > 0.5 ? mean[i] > 1.0 - kPinnedTol
                                       : mean[i] < kPinnedTol;
        separated = pinned;
      }
    }
    if (separated) {
      fit.diagnostic = "separation: fitted probabilities pinned at 0 or 1";
      break;
    }

    const Eigen::VectorXd score = x.transpose() * (y - mean);
    if (score.cwiseAbs().maxCoeff() < kScoreTol) {
      fit.converged = true;
      break;
    }

    accumulate_info();
    Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) {
      info.diagonal().array() += kRidge;
      step = info.ldlt().solve(score);
      if (!step.allFinite()) {
        fit.diagnostic = "information matrix could not be factored";
        break;
      }
    }

    const Eigen::VectorXd direction = x * step;
    double scale = 1.0;
    Eigen::VectorXd trial_linear;
    double trial_ll = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      trial_linear = linear + scale * direction;
      trial_ll = log_likelihood_at(trial_linear, y);
      if (trial_ll >= ll) break;
      scale *= 0.5;
    }
    if (trial_ll < ll) {
      fit.diagnostic = "step halving failed to improve the log-likelihood";
      break;
    }

    coef += scale * step;
    linear.swap(trial_linear);
    ++fit.iterations;

    const double change = std::abs(trial_ll - ll);
    ll = trial_ll;
    if (change <= kRelLikTol * std::max(1.0, std::abs(ll))) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged && fit.diagnostic.empty()) {
    fit.diagnostic = "maximum iterations reached";
  }

  fit.alpha1 = coef[0];
  for (int lag = 1; lag <= p; ++lag) {
    fit.beta1[static_cast<std::size_t>(lag - 1)] = coef[lag];
  }
  fit.log_likelihood = ll;

  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    mean[i] = logistic_stable(linear[i]);
    weight[i] = mean[i] * (1.0 - mean[i]);
  }
  accumulate_info();
  Eigen::LDLT<Eigen::MatrixXd> factor(info);
  Eigen::MatrixXd covariance =
      factor.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k)));
  if (covariance.allFinite()) {
    for (std::size_t j = 0; j < k; ++j) {
      const double variance = covariance(static_cast<Eigen::Index>(j),
                                         static_cast<Eigen::Index>(j));
      if (variance > 0.0) {
        fit.std_errors[j] = std::sqrt(variance);
        fit.z_values[j] = coef[static_cast<Eigen::Index>(j)] / fit.std_errors[j];
      }
    }
  }
  return fit;
}

PowerLawFit fit_power_law(const std::vector<double>& values,
                          const std::vector<long>& indices,
                          std::pair<long, long> window) {
  if (values.size() != indices.size()) {
    throw std::invalid_argument("fit_power_law: values and indices differ in length");
  }
  if (window.first >= window.second) {
    throw std::invalid_argument("fit_power_law: window must satisfy lo < hi");
  }

  PowerLawFit fit;
  fit.range = window;
  std::vector<double> lx, lv;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (indices[i] <= 0) {
      throw std::invalid_argument("fit_power_law: indices must be positive");
    }
    if (indices[i] < window.first || indices[i] > window.second) continue;
    if (values[i] <= 0.0) {
      ++fit.excluded;
      continue;
    }
    lx.push_back(std::log(static_cast<double>(indices[i])));
    lv.push_back(std::log(values[i]));
  }
  fit.n_points = lx.size();
  if (fit.n_points < 3) {
    throw std::invalid_argument("fit_power_law: fewer than 3 usable points");
  }

  const double m = static_cast<double>(fit.n_points);
  double mean_x = 0.0, mean_v = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mean_x += lx[i];
    mean_v += lv[i];
  }
  mean_x /= m;
  mean_v /= m;
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mean_x) * (lx[i] - mean_x);
    sxv += (lx[i] - mean_x) * (lv[i] - mean_v);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("fit_power_law: indices are all equal in the window");
  }
  const double slope = sxv / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double resid = lv[i] - mean_v - slope * (lx[i] - mean_x);
    rss += resid * resid;
  }
  fit.exponent = -slope;
  fit.exponent_se = std::sqrt(rss / (m - 2.0) / sxx);
  return fit;
}

std::string significance_stars(double z) {
  const double a = std::abs(z);
  if (a >= 3.2905267314919255) return "***";
  if (a >= 2.5758293035489004) return "**";
  if (a >= 1.959963984540054) return "*";
  return "";
}

}  // namespace tickms
