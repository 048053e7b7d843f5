#include "tickms/dcmm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tickms {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

long pow3(int p) {
  long n = 1;
  for (int l = 0; l < p; ++l) n *= 3;
  return n;
}

void require_analytic_order(int p) {
  if (p > kMaxAnalyticOrder) {
    throw std::invalid_argument("order " + std::to_string(p) +
                                " exceeds the dense chain cap of " +
                                std::to_string(kMaxAnalyticOrder));
  }
}

int value_to_digit(int squared_return) {
  switch (squared_return) {
    case 0: return 0;
    case 1: return 1;
    case 4: return 2;
    default:
      throw SupportViolation("squared return must be 0, 1, or 4, got " +
                             std::to_string(squared_return));
  }
}

}  // namespace

void DcmmParams::validate() const {
  chain.validate();
  if (p < 1) throw std::invalid_argument("regression order must be at least 1");
  if (static_cast<int>(beta1.size()) != p) {
    throw std::invalid_argument("beta1 must have exactly p = " + std::to_string(p) +
                                " coefficients, got " + std::to_string(beta1.size()));
  }
  for (double b : beta1) {
    if (!std::isfinite(b)) throw std::invalid_argument("beta1 coefficients must be finite");
  }
  if (!std::isfinite(alpha1)) throw std::invalid_argument("alpha1 must be finite");
  if (!(theta4 >= 0.0 && theta4 < 0.5)) {
    throw std::invalid_argument("theta4 must lie in [0, 1/2)");
  }
  if (!gamma.empty()) {
    throw std::invalid_argument("return-sign regressors are not supported; gamma must be empty");
  }
}

SquaredReturnWindow::SquaredReturnWindow(std::vector<int> values) : values_(std::move(values)) {
  for (int v : values_) value_to_digit(v);
}

SquaredReturnWindow SquaredReturnWindow::zeros(int p) {
  if (p < 0) throw std::invalid_argument("window length must be non-negative");
  return SquaredReturnWindow(std::vector<int>(static_cast<std::size_t>(p), 0));
}

int SquaredReturnWindow::at_lag(int lag) const {
  if (lag < 1 || lag > order()) {
    throw std::out_of_range("lag must lie in 1..p");
  }
  return values_[static_cast<std::size_t>(order() - lag)];
}

void SquaredReturnWindow::push(int squared_return) {
  value_to_digit(squared_return);
  if (values_.empty()) return;
  values_.erase(values_.begin());
  values_.push_back(squared_return);
}

double eta(TransitionState k, const SquaredReturnWindow& window, const DcmmParams& params) {
  if (k.value() != 1 && k.value() != 4) {
    throw std::invalid_argument("eta is defined for regimes 1 and 4 only");
  }
  if (window.order() != params.p) {
    throw std::invalid_argument("window length must equal the regression order");
  }
  if (k.value() == 4) return 2.0 * params.theta4;
  double z = params.alpha1;
  for (int lag = 1; lag <= params.p; ++lag) {
    z += params.beta1[static_cast<std::size_t>(lag - 1)] * window.at_lag(lag);
  }
  return logistic(z);
}

ReturnPmf regime_return_pmf(TransitionState k, const SquaredReturnWindow& window,
                            const DcmmParams& params) {
  ReturnPmf pmf{};
  switch (k.value()) {
    case 1: {
      const double jump = eta(k, window, params);
      pmf.mass = {jump / 2, 0.0, 1.0 - jump, 0.0, jump / 2};
      break;
    }
    case 2:
    case 3:
      pmf.mass = {0.0, 0.5, 0.0, 0.5, 0.0};
      break;
    case 4:
      pmf.mass = {params.theta4, 0.0, 1.0 - 2.0 * params.theta4, 0.0, params.theta4};
      break;
  }
  return pmf;
}

long index_map(const std::vector<int>& indices) {
  const int p = static_cast<int>(indices.size());
  if (p < 1) throw std::invalid_argument("index tuple must not be empty");
  long m = 0;
  for (int l = 1; l <= p - 1; ++l) {
    const int i = indices[static_cast<std::size_t>(l - 1)];
    if (i < 1 || i > 3) throw std::invalid_argument("index entries must lie in {1,2,3}");
    m += pow3(p - l) * (3 - i);
  }
  const int last = indices[static_cast<std::size_t>(p - 1)];
  if (last < 1 || last > 3) throw std::invalid_argument("index entries must lie in {1,2,3}");
  return m + 4 - last;
}

std::vector<int> index_tuple(long m, int p) {
  if (p < 1) throw std::invalid_argument("order must be at least 1");
  if (m < 1 || m > pow3(p)) throw std::out_of_range("state label out of 1..3^p");
  std::vector<int> indices(static_cast<std::size_t>(p));
  long rem = m - 1;
  for (int l = p; l >= 1; --l) {
    indices[static_cast<std::size_t>(l - 1)] = 3 - static_cast<int>(rem % 3);
    rem /= 3;
  }
  return indices;
}

int state_current_value(long m0) {
  const int digit = static_cast<int>(m0 % 3);
  return digit * digit;
}

SquaredReturnWindow state_window(long m0, int p) {
  std::vector<int> values(static_cast<std::size_t>(p));
  long rem = m0;
  for (int pos = p - 1; pos >= 0; --pos) {
    const int digit = static_cast<int>(rem % 3);
    values[static_cast<std::size_t>(pos)] = digit * digit;
    rem /= 3;
  }
  return SquaredReturnWindow(std::move(values));
}

std::array<StochasticMatrix, 4> build_regime_matrices(const DcmmParams& params) {
  params.validate();
  require_analytic_order(params.p);
  const long n = pow3(params.p);
  const long shift_mod = n / 3;
  std::array<Eigen::MatrixXd, 4> U;
  for (auto& u : U) u = Eigen::MatrixXd::Zero(n, n);

  for (long m0 = 0; m0 < n; ++m0) {
    const auto window = state_window(m0, params.p);
    const double e1 = eta(TransitionState(1), window, params);
    const double e4 = 2.0 * params.theta4;
    const long base = (m0 % shift_mod) * 3;
    // Digits 0, 1, 2 correspond to a new squared return of 0, 1, 4.
    U[0](m0, base + 2) = e1;
    U[0](m0, base + 0) = 1.0 - e1;
    U[1](m0, base + 1) = 1.0;
    U[2](m0, base + 1) = 1.0;
    U[3](m0, base + 2) = e4;
    U[3](m0, base + 0) = 1.0 - e4;
  }
  return {StochasticMatrix::from_matrix(std::move(U[0])),
          StochasticMatrix::from_matrix(std::move(U[1])),
          StochasticMatrix::from_matrix(std::move(U[2])),
          StochasticMatrix::from_matrix(std::move(U[3]))};
}

SquaredReturnChain build_squared_chain(const DcmmParams& params) {
  params.validate();
  require_analytic_order(params.p);
  auto [M, lambda] = build_transition_chain(params.chain);
  const double lam1 = lambda[0];
  const double lam23 = lambda[1] + lambda[2];
  const double lam4 = lambda[3];

  const long n = pow3(params.p);
  const long shift_mod = n / 3;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (long m0 = 0; m0 < n; ++m0) {
    const auto window = state_window(m0, params.p);
    const double e1 = eta(TransitionState(1), window, params);
    const double e4 = 2.0 * params.theta4;
    const long base = (m0 % shift_mod) * 3;
    S(m0, base + 0) = lam1 * (1.0 - e1) + lam4 * (1.0 - e4);
    S(m0, base + 1) = lam23;
    S(m0, base + 2) = lam1 * e1 + lam4 * e4;
  }

  auto S_checked = StochasticMatrix::from_matrix(std::move(S));
  auto Psi = stationary_distribution(S_checked);

  Eigen::Vector3d marginal = Eigen::Vector3d::Zero();
  for (long m0 = 0; m0 < n; ++m0) {
    // psi is ordered by descending squared value: slot 0 holds r^2 = 4
    // (digit 2), slot 1 holds r^2 = 1, slot 2 holds r^2 = 0.
    marginal(2 - m0 % 3) += Psi[m0];
  }
  return SquaredReturnChain{params.p, std::move(S_checked), std::move(Psi),
                            ProbabilityVector::from_vector(marginal)};
}

double e3_closed_form(const DcmmParams& params) {
  params.validate();
  if (params.p != 1) {
    throw std::invalid_argument("the closed-form eigenvalue is defined for order 1 only");
  }
  const SquaredReturnWindow w0({0}), w4({4});
  const double eta1_0 = eta(TransitionState(1), w0, params);
  const double eta1_4 = eta(TransitionState(1), w4, params);
  const double eta4_0 = eta(TransitionState(4), w0, params);
  const double eta4_4 = eta(TransitionState(4), w4, params);
  const double p11 = params.chain.p11;
  const double p21 = params.chain.p21;
  return -((eta4_0 - eta4_4) * (1.0 - p11 - p21 + p11 * p21) + (eta1_0 - eta1_4) * p11 * p21) /
         (p21 - p11 + 1.0);
}

double acf_squared_dcmm(const DcmmParams& params, long tau) {
  if (tau < 1) throw std::invalid_argument("lag must be at least 1");
  if (params.p > 1) return acf_squared_joint(params, tau);
  params.validate();

  // Order-1 closed form on the 3-state squared-return chain, with states
  // permuted to descending squared value to match the marginal ordering.
  const auto chain = build_squared_chain(params);
  Eigen::Matrix3d P;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) P(i, j) = chain.S(2 - i, 2 - j);
  const auto Pt = matrix_power(StochasticMatrix::from_matrix(P), tau);

  const Eigen::Vector3d psi = chain.psi.vector();
  const Eigen::Vector3d delta(4.0, 1.0, 0.0);
  const Eigen::Vector3d delta2(16.0, 1.0, 0.0);
  const Eigen::Vector3d xi = delta.cwiseProduct(psi);
  const double e2 = delta.dot(psi);
  const double e4 = delta2.dot(psi);
  const double variance = e4 - e2 * e2;
  if (variance <= 0.0) throw std::domain_error("squared returns have zero variance");
  return (xi.dot(Pt.matrix() * delta) - e2 * e2) / variance;
}

double acf_squared_joint(const DcmmParams& params, long tau) {
  if (tau < 1) throw std::invalid_argument("lag must be at least 1");
  const auto chain = build_squared_chain(params);
  const long n = chain.S.size();
  const Eigen::VectorXd& Psi = chain.Psi.vector();

  const double e2 = 4.0 * chain.psi[0] + chain.psi[1];
  const double e4 = 16.0 * chain.psi[0] + chain.psi[1];
  const double variance = e4 - e2 * e2;
  if (variance <= 0.0) throw std::domain_error("squared returns have zero variance");

  // One indicator vector per possible current value, each centered by its
  // stationary mass so the joint table accumulates deviations from
  // independence directly. Propagating the centered vectors keeps the tiny
  // covariances at large lags from drowning in the product of marginals; the
  // re-centering inside the loop only removes rounding drift, since the
  // stationary functional of a centered vector is zero already.
  const std::array<double, 3> values = {4.0, 1.0, 0.0};
  const std::array<double, 3> mass = {chain.psi[0], chain.psi[1], chain.psi[2]};
  std::array<Eigen::VectorXd, 3> g;
  for (int b = 0; b < 3; ++b) {
    g[b] = Eigen::VectorXd::Constant(n, -mass[static_cast<std::size_t>(b)]);
    for (long m0 = 0; m0 < n; ++m0) {
      if (state_current_value(m0) == static_cast<int>(values[static_cast<std::size_t>(b)])) {
        g[b](m0) += 1.0;
      }
    }
  }
  for (long t = 0; t < tau; ++t) {
    for (auto& gb : g) {
      gb = chain.S.matrix() * gb;
      gb.array() -= Psi.dot(gb);
    }
  }

  // joint_dev[a][b] = P(r^2(t) = a, r^2(t+tau) = b) - psi_a psi_b, summed
  // over every state pair with those current values.
  double cov = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      double dev = 0.0;
      for (long m0 = 0; m0 < n; ++m0) {
        if (state_current_value(m0) == static_cast<int>(values[static_cast<std::size_t>(a)])) {
          dev += Psi(m0) * g[static_cast<std::size_t>(b)](m0);
        }
      }
      cov += values[static_cast<std::size_t>(a)] * values[static_cast<std::size_t>(b)] * dev;
    }
  }
  return cov / variance;
}

StochasticMatrix build_return_level_chain(const DcmmParams& params) {
  params.validate();
  if (params.p != 1) {
    throw std::invalid_argument("the return-level chain is defined for order 1 only");
  }
  auto [M, lambda] = build_transition_chain(params.chain);
  const double lam1 = lambda[0];
  const double lam23 = lambda[1] + lambda[2];
  const double lam4 = lambda[3];

  Eigen::MatrixXd N(5, 5);
  const std::array<int, 5> levels = {2, 1, 0, -1, -2};
  for (int row = 0; row < 5; ++row) {
    const int r = levels[static_cast<std::size_t>(row)];
    const SquaredReturnWindow window({r * r});
    const double e1 = eta(TransitionState(1), window, params);
    const double e4 = 2.0 * params.theta4;
    const double jump = lam1 * e1 + lam4 * e4;
    N(row, 0) = jump / 2;
    N(row, 1) = lam23 / 2;
    N(row, 2) = lam1 * (1.0 - e1) + lam4 * (1.0 - e4);
    N(row, 3) = lam23 / 2;
    N(row, 4) = jump / 2;
  }
  return StochasticMatrix::from_matrix(std::move(N));
}

}  // namespace tickms
