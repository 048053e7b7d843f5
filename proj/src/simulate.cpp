#include "tickms/simulate.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "tickms/rng.hpp"

namespace tickms {
namespace {

const MsParams& switching_params(const SimConfig& config) {
  const auto* params = std::get_if<MsParams>(&config.params);
  if (params == nullptr) {
    throw std::invalid_argument("SimConfig: switching models require MsParams");
  }
  return *params;
}

const DcmmParams& double_chain_params(const SimConfig& config) {
  const auto* params = std::get_if<DcmmParams>(&config.params);
  if (params == nullptr) {
    throw std::invalid_argument("SimConfig: the double chain model requires DcmmParams");
  }
  return *params;
}

const SpreadChainParams& spread_chain(const SimConfig& config) {
  if (config.model == Model::Dcmm) return double_chain_params(config).chain;
  return switching_params(config).chain;
}

// Inverse-CDF draw over the five return values. Only indices with positive
// mass can be selected; the fallback guards the u ~ 1 rounding edge.
int sample_return(const ReturnPmf& pmf, double u) {
  double acc = 0.0;
  int last_positive = 2;
  for (int idx = 0; idx < 5; ++idx) {
    const double mass = pmf.mass[static_cast<std::size_t>(idx)];
    if (mass > 0.0) last_positive = idx;
    acc += mass;
    if (u < acc) return idx - 2;
  }
  return last_positive - 2;
}

std::vector<SpreadState> draw_spreads(rng::Xoshiro256pp& gen, const SpreadChainParams& chain,
                                      std::size_t count) {
  std::vector<SpreadState> spreads;
  spreads.reserve(count);
  const auto pi = chain.spread_stationary();
  spreads.push_back(SpreadState(gen.uniform01() < pi[0] ? 1 : 2));
  for (std::size_t t = 1; t < count; ++t) {
    const double to_one = spreads.back().ticks() == 1 ? chain.p11 : chain.p21;
    spreads.push_back(SpreadState(gen.uniform01() < to_one ? 1 : 2));
  }
  return spreads;
}

}  // namespace

void SimConfig::validate() const {
  if (length < 1) throw std::invalid_argument("SimConfig: length must be at least 1");
  if (n_runs < 1) throw std::invalid_argument("SimConfig: n_runs must be at least 1");
  switch (model) {
    case Model::MsBernoulli: {
      const auto& ms = switching_params(*this);
      ms.validate();
      if (!ms.chain.bernoulli_p.has_value()) {
        throw std::invalid_argument(
            "SimConfig: the Bernoulli model requires a chain built with bernoulli()");
      }
      break;
    }
    case Model::Ms:
      switching_params(*this).validate();
      break;
    case Model::Dcmm: {
      const auto& dcmm = double_chain_params(*this);
      dcmm.validate();
      if (burn_in.has_value() && *burn_in < static_cast<std::size_t>(dcmm.p)) {
        throw std::invalid_argument(
            "SimConfig: double chain burn-in must cover the window order p");
      }
      break;
    }
  }
}

std::size_t SimConfig::effective_burn_in() const {
  if (burn_in.has_value()) return *burn_in;
  if (model == Model::Dcmm) {
    const auto p = static_cast<std::size_t>(double_chain_params(*this).p);
    return std::max<std::size_t>(10 * p, 1000);
  }
  return 0;
}

std::vector<SpreadState> simulate_spread(const SpreadChainParams& chain, std::size_t length,
                                         std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("simulate_spread: length must be at least 1");
  chain.validate();
  rng::Xoshiro256pp gen(seed);
  return draw_spreads(gen, chain, length);
}

SimPath simulate_path(const SimConfig& config) {
  config.validate();
  const std::size_t burn = config.effective_burn_in();
  const std::size_t total = burn + config.length;

  rng::Xoshiro256pp gen(config.seed);
  std::vector<SpreadState> spreads = draw_spreads(gen, spread_chain(config), total + 1);

  std::vector<TransitionState> transitions;
  std::vector<Return> returns;
  transitions.reserve(total);
  returns.reserve(total);

  if (config.model == Model::Dcmm) {
    const auto& params = double_chain_params(config);
    auto window = SquaredReturnWindow::zeros(params.p);
    const auto pmf_change = regime_return_pmf(TransitionState(2), window, params);
    const auto pmf_wide = regime_return_pmf(TransitionState(4), window, params);
    for (std::size_t t = 0; t < total; ++t) {
      const auto x = encode_transition(spreads[t], spreads[t + 1]);
      const double u = gen.uniform01();
      int r = 0;
      switch (x.value()) {
        case 1:
          r = sample_return(regime_return_pmf(x, window, params), u);
          break;
        case 2:
        case 3:
          r = sample_return(pmf_change, u);
          break;
        case 4:
          r = sample_return(pmf_wide, u);
          break;
      }
      transitions.push_back(x);
      returns.push_back(Return(r));
      window.push(r * r);
    }
  } else {
    const auto& params = switching_params(config);
    const std::array<ReturnPmf, 4> pmfs = {
        conditional_return_pmf(TransitionState(1), params),
        conditional_return_pmf(TransitionState(2), params),
        conditional_return_pmf(TransitionState(3), params),
        conditional_return_pmf(TransitionState(4), params),
    };
    for (std::size_t t = 0; t < total; ++t) {
      const auto x = encode_transition(spreads[t], spreads[t + 1]);
      const double u = gen.uniform01();
      transitions.push_back(x);
      returns.push_back(Return(sample_return(pmfs[static_cast<std::size_t>(x.value() - 1)], u)));
    }
  }

  SimPath path;
  path.seed_used = config.seed;
  if (burn == 0) {
    path.spreads = std::move(spreads);
    path.transitions = std::move(transitions);
    path.returns = std::move(returns);
  } else {
    const auto offset = static_cast<std::ptrdiff_t>(burn);
    path.spreads.assign(spreads.begin() + offset, spreads.end());
    path.transitions.assign(transitions.begin() + offset, transitions.end());
    path.returns.assign(returns.begin() + offset, returns.end());
  }
  return path;
}

void write_path_csv(const SimPath& path, std::ostream& out) {
  if (path.spreads.size() != path.returns.size() + 1 ||
      path.transitions.size() != path.returns.size()) {
    throw std::invalid_argument("write_path_csv: inconsistent path lengths");
  }
  out << "t,s,x,r\n";
  for (std::size_t t = 0; t < path.returns.size(); ++t) {
    out << t << ',' << path.spreads[t + 1].ticks() << ',' << path.transitions[t].value() << ','
        << path.returns[t].half_ticks() << '\n';
  }
}

EnsembleResult run_ensemble(const SimConfig& config, const PathStatistic& statistic) {
  config.validate();
  if (!statistic) throw std::invalid_argument("run_ensemble: statistic must be callable");

  EnsembleResult result;
  const auto n = static_cast<std::size_t>(config.n_runs);
  result.values.reserve(n);
  result.seeds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SimConfig run = config;
    run.seed = rng::derive_stream(config.seed, i);
    run.n_runs = 1;
    result.seeds.push_back(run.seed);
    result.values.push_back(statistic(simulate_path(run)));
  }

  double sum = 0.0;
  for (const double v : result.values) sum += v;
  result.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (const double v : result.values) {
      const double d = v - result.mean;
      ss += d * d;
    }
    result.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return result;
}

}  // namespace tickms
