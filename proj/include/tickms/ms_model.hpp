#pragma once
// The memoryless regime-switching return model. Conditional on the transition
// state x, returns are drawn symmetrically:
//   x = 1: +-2 with probability theta1 each, 0 otherwise
//   x = 2, 3: +-1 with probability 1/2
//   x = 4: +-2 with probability theta4 each, 0 otherwise
// so all odd moments vanish and the only memory is the one carried by x.
// Moments and autocorrelations follow in closed form from the stationary law
// lambda of the transition chain.

#include "tickms/core.hpp"
#include "tickms/markov.hpp"

#include <array>

namespace tickms {

struct MsParams {
  SpreadChainParams chain;
  double theta1 = 0.0;
  double theta4 = 0.0;

  void validate() const;
};

// Probability mass over returns, indexed by half-tick value + 2.
struct ReturnPmf {
  std::array<double, 5> mass{};

  [[nodiscard]] double at(int half_ticks) const { return mass.at(half_ticks + 2); }
  [[nodiscard]] double sum() const;
};

// Conditional moment vectors across the four regimes and the unconditional
// scalars they induce through lambda.
struct MomentSet {
  Eigen::Vector4d m1;  // conditional means, identically zero
  Eigen::Vector4d m2;  // conditional second moments (8 th1, 1, 1, 8 th4)
  Eigen::Vector4d m4;  // conditional fourth moments (32 th1, 1, 1, 32 th4)
  double e_r2 = 0.0;
  double e_r4 = 0.0;
  double var_r = 0.0;
  double var_r2 = 0.0;
  double excess_kurtosis = 0.0;
};

ReturnPmf conditional_return_pmf(TransitionState x, const MsParams& params);

MomentSet unconditional_moments(const MsParams& params);

// General regime-autocorrelation evaluator shared by both lag functions:
//   (lambda' diag(v) M^tau v - (v' lambda)^2) / (w' lambda - (v' lambda)^2)
// where v holds the regime-conditional means of the analyzed quantity and w
// its regime-conditional second moments. Computed through the centered form
// lambda' diag(v) (M - Pi)^tau v with Pi = 1 lambda', which is algebraically
// identical but keeps full relative precision once the value is tiny.
// Exposed so hypothetical conditional laws can be analyzed with the same
// contraction. Requires tau >= 1.
double regime_acf(const SpreadChainParams& chain, const Eigen::Vector4d& v,
                  const Eigen::Vector4d& w, long tau);

// Autocorrelation of returns at lag tau; exactly 0 for this symmetric model
// because the conditional means vanish.
double acf_returns(const MsParams& params, long tau);

// Autocorrelation of squared returns at lag tau (v = m2, w = m4 above).
// Decays geometrically with ratio p11 - p21 from the first lag on.
double acf_squared(const MsParams& params, long tau);

}  // namespace tickms
