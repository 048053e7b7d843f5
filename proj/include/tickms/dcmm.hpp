#pragma once

#include <array>
#include <vector>

#include "tickms/markov.hpp"
#include "tickms/ms_model.hpp"

namespace tickms {

// Double-chain model of order p. The spread transition regime is drawn as in
// the switching model, but the conditional law of the return in regime 1 is
// tied to the recent past through a logit link on the last p squared returns.
// Regimes 2 and 3 stay symmetric coin flips on {-1,+1}, and regime 4 keeps a
// window-independent jump probability of 2*theta4.
struct DcmmParams {
  SpreadChainParams chain;
  int p = 1;
  double alpha1 = 0.0;
  // beta1[l-1] multiplies r^2(t-l); lag 1 is the most recent observation.
  std::vector<double> beta1;
  double theta4 = 0.0;
  // Return-sign regressors are carried for interface compatibility but must
  // stay empty; the model is only defined here without them.
  std::vector<double> gamma;

  void validate() const;
};

// Largest order for which the dense 3^p chain objects are built. Above this
// the matrices no longer fit comfortably in memory; sampling and estimation
// paths handle larger orders without them.
inline constexpr int kMaxAnalyticOrder = 8;

// Ordered record of the last p squared returns, oldest first. Values live in
// {0, 1, 4} (squared half-ticks). An empty window is the order-0 case used
// by intercept-only estimation; push leaves it empty.
class SquaredReturnWindow {
 public:
  explicit SquaredReturnWindow(std::vector<int> values);
  static SquaredReturnWindow zeros(int p);

  int order() const { return static_cast<int>(values_.size()); }
  // r^2(t-l) for lag l in 1..p; lag 1 is the newest entry.
  int at_lag(int lag) const;
  const std::vector<int>& values() const { return values_; }
  // Advances the window one step: drops the oldest value, appends the newest.
  void push(int squared_return);

 private:
  std::vector<int> values_;
};

// Jump probability of regime k for the given window. Only regimes 1 and 4
// carry one: regime 1 uses logistic(alpha1 + sum_l beta1[l-1] * r^2(t-l)),
// regime 4 returns the constant 2*theta4.
double eta(TransitionState k, const SquaredReturnWindow& window, const DcmmParams& params);

// Conditional return distribution of regime k given the window.
ReturnPmf regime_return_pmf(TransitionState k, const SquaredReturnWindow& window,
                            const DcmmParams& params);

// Bijection between index tuples and chain states. A tuple (i_1, ..., i_p)
// with entries in {1,2,3} codes the window through r^2 = (3-i)^2, oldest
// entry first; the state label is
//   m = sum_{l=1}^{p-1} 3^(p-l) * (3 - i_l) + 4 - i_p,
// a 1-based integer in 1..3^p. In 0-based form the tuple digits 3-i_l make up
// the base-3 expansion of m-1 with the oldest lag most significant, so the
// current squared return of state m is ((m-1) mod 3)^2.
long index_map(const std::vector<int>& indices);
std::vector<int> index_tuple(long m, int p);

// Current squared return and full window of a 0-based state label.
int state_current_value(long m0);
SquaredReturnWindow state_window(long m0, int p);

// Per-regime transition matrices U_1..U_4 of dimension 3^p on the window
// states. Entry (m, n) is the probability of moving to window n when the
// regime is k, nonzero only when n extends m by one step.
std::array<StochasticMatrix, 4> build_regime_matrices(const DcmmParams& params);

// The window chain marginalized over the regime distribution.
struct SquaredReturnChain {
  int p;
  // S = sum_k lambda_k U_k in index-map state order.
  StochasticMatrix S;
  // Stationary law of S over the 3^p window states.
  ProbabilityVector Psi;
  // Marginal law of the current squared return, ordered (r^2=4, r^2=1,
  // r^2=0) so that E[r^2] = 4*psi[0] + psi[1] and E[r^4] = 16*psi[0] + psi[1].
  ProbabilityVector psi;
};

SquaredReturnChain build_squared_chain(const DcmmParams& params);

// Third eigenvalue of the 3x3 squared-return chain in closed form; the
// spectrum is (0, 1, e3) and e3 controls the geometric decay of the
// squared-return autocorrelation. Defined for p = 1 only.
double e3_closed_form(const DcmmParams& params);

// Autocorrelation of squared returns at lag tau >= 1. For p = 1 this
// evaluates the 3x3 closed form directly; for larger p it defers to
// acf_squared_joint.
double acf_squared_dcmm(const DcmmParams& params, long tau);

// General-order evaluator: sums transition probabilities of the window chain
// over all state pairs sharing a fixed pair of current squared returns, then
// forms the correlation from the marginal moments. Valid for any p up to the
// analytic cap, including p = 1.
double acf_squared_joint(const DcmmParams& params, long tau);

// Transition matrix of the return-level process on {+2,+1,0,-1,-2} (row and
// column order), marginalized over the regime distribution. Defined for
// p = 1, where the level alone determines the window.
StochasticMatrix build_return_level_chain(const DcmmParams& params);

}  // namespace tickms
