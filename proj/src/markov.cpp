#include "tickms/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tickms {

namespace {
constexpr double kEntryTol = 1e-12;

std::string format_residual(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}
}  // namespace

StochasticMatrix StochasticMatrix::from_matrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("StochasticMatrix: matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double e = m(i, j);
      if (!(e >= -kEntryTol && e <= 1.0 + kEntryTol)) {
        throw std::invalid_argument("StochasticMatrix: entry out of [0,1] at row " +
                                    std::to_string(i));
      }
      row_sum += e;
    }
    if (std::abs(row_sum - 1.0) > 1e-12) {
      throw std::invalid_argument("StochasticMatrix: row " + std::to_string(i) +
                                  " sums to " + format_residual(row_sum) + ", not 1");
    }
  }
  return StochasticMatrix(std::move(m));
}

ProbabilityVector ProbabilityVector::from_vector(Eigen::VectorXd v) {
  if (v.size() == 0) throw std::invalid_argument("ProbabilityVector: empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < -kEntryTol) {
      throw std::invalid_argument("ProbabilityVector: negative entry at " + std::to_string(i));
    }
    v(i) = std::max(v(i), 0.0);
    sum += v(i);
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("ProbabilityVector: sums to " + format_residual(sum) +
                                ", not 1");
  }
  return ProbabilityVector(std::move(v));
}

SpreadChainParams SpreadChainParams::markov(double p11, double p21) {
  SpreadChainParams p;
  p.p11 = p11;
  p.p21 = p21;
  p.validate();
  return p;
}

SpreadChainParams SpreadChainParams::bernoulli(double prob) {
  SpreadChainParams p;
  p.p11 = prob;
  p.p21 = prob;
  p.bernoulli_p = prob;
  p.validate();
  return p;
}

void SpreadChainParams::validate() const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p11) || !in_unit(p21)) {
    throw std::invalid_argument("SpreadChainParams: p11 and p21 must lie in [0,1]");
  }
  if (p11 == 1.0 && p21 == 0.0) {
    throw std::invalid_argument(
        "SpreadChainParams: (p11, p21) = (1, 0) gives the identity chain, "
        "which has no unique stationary law");
  }
  if (bernoulli_p) {
    if (*bernoulli_p != p11 || *bernoulli_p != p21) {
      throw std::invalid_argument("SpreadChainParams: bernoulli_p must equal p11 and p21");
    }
  }
}

StochasticMatrix SpreadChainParams::spread_matrix() const {
  validate();
  Eigen::MatrixXd b(2, 2);
  b << p11, 1.0 - p11, p21, 1.0 - p21;
  return StochasticMatrix::from_matrix(std::move(b));
}

ProbabilityVector SpreadChainParams::spread_stationary() const {
  validate();
  const double p22 = 1.0 - p21;
  const double denom = 2.0 - p11 - p22;
  Eigen::VectorXd pi(2);
  pi << (1.0 - p22) / denom, (1.0 - p11) / denom;
  return ProbabilityVector::from_vector(std::move(pi));
}

ProbabilityVector stationary_distribution(const StochasticMatrix& P) {
  const Eigen::Index n = P.size();
  Eigen::MatrixXd A = P.matrix().transpose() - Eigen::MatrixXd::Identity(n, n);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-10);
  if (lu.rank() < n - 1) {
    throw std::runtime_error(
        "stationary_distribution: chain is reducible (stationary law not unique), "
        "rank deficiency " + std::to_string(n - lu.rank()));
  }

  // Replace the first equation with the normalization sum(v) = 1.
  A.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  Eigen::VectorXd v = A.fullPivLu().solve(rhs);

  const double residual = (P.matrix().transpose() * v - v).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-10)) {
    throw std::runtime_error("stationary_distribution: fixed-point residual " +
                             format_residual(residual) + " exceeds 1e-10");
  }
  v = v.cwiseMax(0.0);
  v /= v.sum();
  return ProbabilityVector::from_vector(std::move(v));
}

std::pair<StochasticMatrix, ProbabilityVector> build_transition_chain(const SpreadChainParams& params) {
  params.validate();
  const double p11 = params.p11, p12 = 1.0 - params.p11;
  const double p21 = params.p21, p22 = 1.0 - params.p21;

  Eigen::MatrixXd m(4, 4);
  m << p11, p12, 0, 0,
       0, 0, p21, p22,
       p11, p12, 0, 0,
       0, 0, p21, p22;
  auto M = StochasticMatrix::from_matrix(std::move(m));

  // Closed form for the stationary law of M; denominator 1 - p11 + p21 is
  // nonzero for every accepted parameterization.
  const double denom = 1.0 - p11 + p21;
  Eigen::VectorXd lam(4);
  lam << p21 * p11 / denom,
         p21 * (1.0 - p11) / denom,
         p21 * (1.0 - p11) / denom,
         (1.0 - p21) * (1.0 - p11) / denom;
  auto lambda = ProbabilityVector::from_vector(std::move(lam));

  const double check = (M.matrix().transpose() * lambda.vector() - lambda.vector())
                           .lpNorm<Eigen::Infinity>();
  if (!(check < 1e-12)) {
    throw std::runtime_error("build_transition_chain: closed-form stationary law fails "
                             "the fixed-point check, residual " + format_residual(check));
  }
  return {std::move(M), std::move(lambda)};
}

StochasticMatrix matrix_power(const StochasticMatrix& P, long tau) {
  if (tau < 0) throw std::invalid_argument("matrix_power: tau must be >= 0");
  const Eigen::Index n = P.size();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd base = P.matrix();
  long t = tau;
  while (t > 0) {
    if (t & 1) result = result * base;
    base = base * base;
    t >>= 1;
  }
  // Squaring drifts row sums by tiny amounts; renormalize within the allowed
  // 1e-10 band and fail loudly beyond it.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = result.row(i).sum();
    if (std::abs(s - 1.0) > 1e-10) {
      throw std::runtime_error("matrix_power: row sum drifted to " + format_residual(s));
    }
    result.row(i) /= s;
  }
  return StochasticMatrix::from_matrix(std::move(result));
}

std::vector<std::complex<double>> spectrum(const StochasticMatrix& P) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(P.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectrum: eigenvalue computation failed");
  }
  std::vector<std::complex<double>> eig(P.size());
  for (Eigen::Index i = 0; i < P.size(); ++i) eig[i] = solver.eigenvalues()(i);
  std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
    return std::abs(a) > std::abs(b);
  });
  if (std::abs(eig.front() - std::complex<double>(1.0, 0.0)) > 1e-10) {
    throw std::runtime_error("spectrum: leading eigenvalue deviates from 1");
  }
  return eig;
}

}  // namespace tickms
