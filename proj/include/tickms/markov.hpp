#pragma once
// Finite-state Markov chain utilities: validated row-stochastic matrices,
// stationary distributions by direct linear solve, exact matrix powers, and
// spectra. Also builds the two-state spread chain B and the four-state
// transition chain (M, lambda) derived from it.

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace tickms {

// Row-stochastic square matrix. Construction validates that every entry lies
// in [0,1] and every row sums to 1 within 1e-12.
class StochasticMatrix {
 public:
  static StochasticMatrix from_matrix(Eigen::MatrixXd m);

  [[nodiscard]] Eigen::Index size() const { return m_.rows(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  explicit StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

// Probability vector: entries >= 0 summing to 1 within 1e-12.
class ProbabilityVector {
 public:
  static ProbabilityVector from_vector(Eigen::VectorXd v);

  [[nodiscard]] Eigen::Index size() const { return v_.size(); }
  [[nodiscard]] double operator[](Eigen::Index i) const { return v_(i); }
  [[nodiscard]] const Eigen::VectorXd& vector() const { return v_; }

 private:
  explicit ProbabilityVector(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

// Parameters of the two-state spread chain: p11 = P(next spread 1 | spread 1)
// and p21 = P(next spread 1 | spread 2). The Bernoulli limit (spread states
// drawn i.i.d.) is the diagonal p11 = p21 = bernoulli_p.
//
// Values in [0,1] are accepted; the single corner (p11, p21) = (1, 0) is
// rejected because its chain is the identity and has no unique stationary law.
struct SpreadChainParams {
  double p11 = 0.0;
  double p21 = 0.0;
  std::optional<double> bernoulli_p;

  static SpreadChainParams markov(double p11, double p21);
  static SpreadChainParams bernoulli(double p);

  void validate() const;

  // The 2x2 spread matrix B with rows (p11, 1-p11), (p21, 1-p21).
  [[nodiscard]] StochasticMatrix spread_matrix() const;

  // Stationary law of B by the two-state closed form.
  [[nodiscard]] ProbabilityVector spread_stationary() const;
};

// Unique stationary distribution of P, solving (P' - I)v = 0 with a
// normalization row. Rejects chains without a unique stationary law
// (rank(P' - I) < n - 1, e.g. the identity) and reports the fixed-point
// residual if the solve degrades numerically.
ProbabilityVector stationary_distribution(const StochasticMatrix& P);

// The four-state transition chain derived from the spread chain: M has rows
// (p11, p12, 0, 0), (0, 0, p21, p22), (p11, p12, 0, 0), (0, 0, p21, p22) and
// lambda is its stationary law, evaluated in closed form and cross-checked
// against the numeric solve.
std::pair<StochasticMatrix, ProbabilityVector> build_transition_chain(const SpreadChainParams& params);

// P^tau by repeated squaring; tau = 0 yields the identity.
StochasticMatrix matrix_power(const StochasticMatrix& P, long tau);

// Eigenvalues sorted by modulus, largest first. The leading eigenvalue of a
// stochastic matrix must be 1 within 1e-10 or the computation is rejected.
std::vector<std::complex<double>> spectrum(const StochasticMatrix& P);

}  // namespace tickms
