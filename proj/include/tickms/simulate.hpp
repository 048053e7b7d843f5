#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "tickms/dcmm.hpp"
#include "tickms/ms_model.hpp"

namespace tickms {

enum class Model { MsBernoulli, Ms, Dcmm };

// Simulation request. The Bernoulli and Markov switching models take
// MsParams (the former requires a chain built with bernoulli()); the double
// chain model takes DcmmParams. burn_in left unset picks the model default:
// zero for the switching models, whose recorded path is stationary from the
// first step, and max(10p, 1000) for order-p double chains so the zero-seeded
// window washes out.
struct SimConfig {
  Model model = Model::Ms;
  std::variant<MsParams, DcmmParams> params;
  std::size_t length = 1'000'000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> burn_in;
  int n_runs = 25;

  void validate() const;
  [[nodiscard]] std::size_t effective_burn_in() const;
};

// One simulated path. spreads holds length+1 states; transitions[t] encodes
// the pair (spreads[t], spreads[t+1]) and returns[t] is drawn from that
// regime, so both hold length entries. The final spread has no successor and
// produces no return.
struct SimPath {
  std::vector<SpreadState> spreads;
  std::vector<TransitionState> transitions;
  std::vector<Return> returns;
  std::uint64_t seed_used = 0;
};

// Spread states alone: the first drawn from the stationary law, the rest by
// row sampling. Deterministic for a given seed.
std::vector<SpreadState> simulate_spread(const SpreadChainParams& chain, std::size_t length,
                                         std::uint64_t seed);

// The spread path is generated first, then returns are drawn from the
// regime-conditional laws; a double chain advances its window with each
// realized squared return. The burn-in prefix is discarded.
SimPath simulate_path(const SimConfig& config);

// Writes rows "t,s,x,r" with a header, one row per return; the s column is
// the spread after transition t, matching the second component of x.
void write_path_csv(const SimPath& path, std::ostream& out);

using PathStatistic = std::function<double(const SimPath&)>;

struct EnsembleResult {
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  double mean = 0.0;
  // Sample standard deviation over runs; absent when n_runs < 2.
  std::optional<double> sd;
};

// Runs the statistic over n_runs independent paths. Run i draws its seed from
// the master seed by the documented stream-split rule, so ensembles are
// reproducible and runs can be regenerated individually.
EnsembleResult run_ensemble(const SimConfig& config, const PathStatistic& statistic);

}  // namespace tickms
