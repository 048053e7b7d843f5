#include "tickms/ms_model.hpp"

#include <stdexcept>

namespace tickms {

void MsParams::validate() const {
  chain.validate();
  if (!(theta1 >= 0.0 && theta1 < 0.5) || !(theta4 >= 0.0 && theta4 < 0.5)) {
    throw std::invalid_argument("MsParams: theta1 and theta4 must lie in [0, 1/2)");
  }
}

double ReturnPmf::sum() const {
  double s = 0.0;
  for (double p : mass) s += p;
  return s;
}

ReturnPmf conditional_return_pmf(TransitionState x, const MsParams& params) {
  params.validate();
  ReturnPmf pmf;
  if (x.spread_constant()) {
    const double theta = (x.value() == 1) ? params.theta1 : params.theta4;
    pmf.mass[0] = theta;            // r = -2
    pmf.mass[2] = 1.0 - 2 * theta;  // r = 0
    pmf.mass[4] = theta;            // r = +2
  } else {
    pmf.mass[1] = 0.5;  // r = -1
    pmf.mass[3] = 0.5;  // r = +1
  }
  return pmf;
}

MomentSet unconditional_moments(const MsParams& params) {
  params.validate();
  auto [M, lambda] = build_transition_chain(params.chain);

  MomentSet mo;
  mo.m1.setZero();
  mo.m2 << 8 * params.theta1, 1, 1, 8 * params.theta4;
  mo.m4 << 32 * params.theta1, 1, 1, 32 * params.theta4;
  mo.e_r2 = mo.m2.dot(lambda.vector());
  mo.e_r4 = mo.m4.dot(lambda.vector());
  mo.var_r = mo.e_r2;  // mean is zero
  mo.var_r2 = mo.e_r4 - mo.e_r2 * mo.e_r2;
  mo.excess_kurtosis = mo.e_r4 / (mo.e_r2 * mo.e_r2) - 3.0;
  return mo;
}

double regime_acf(const SpreadChainParams& chain, const Eigen::Vector4d& v,
                  const Eigen::Vector4d& w, long tau) {
  if (tau < 1) throw std::invalid_argument("regime_acf: tau must be >= 1");
  auto [M, lambda] = build_transition_chain(chain);
  const Eigen::Vector4d lam = lambda.vector();

  const double mean = v.dot(lam);
  const double variance = w.dot(lam) - mean * mean;
  if (variance <= 0.0) {
    throw std::domain_error("regime_acf: degenerate quantity with zero variance");
  }

  // (M - Pi)^tau v by repeated application; Pi = 1 lambda' absorbs the
  // stationary component so the remainder decays cleanly.
  Eigen::Vector4d x = v;
  for (long t = 0; t < tau; ++t) {
    x = M.matrix() * x - Eigen::Vector4d::Constant(lam.dot(x));
  }
  const double cov = (lam.array() * v.array() * x.array()).sum();
  return cov / variance;
}

double acf_returns(const MsParams& params, long tau) {
  params.validate();
  MomentSet mo = unconditional_moments(params);
  return regime_acf(params.chain, mo.m1, mo.m2, tau);
}

double acf_squared(const MsParams& params, long tau) {
  params.validate();
  MomentSet mo = unconditional_moments(params);
  return regime_acf(params.chain, mo.m2, mo.m4, tau);
}

}  // namespace tickms
