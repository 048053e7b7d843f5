// Python surface of the library. Parameter sets are real classes; results
// cross the boundary as plain dicts and lists so callers can feed them to
// numpy or pandas without extra wrappers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "tickms/calibrate.hpp"
#include "tickms/core.hpp"
#include "tickms/dcmm.hpp"
#include "tickms/ingest.hpp"
#include "tickms/markov.hpp"
#include "tickms/ms_model.hpp"
#include "tickms/simulate.hpp"
#include "tickms/stats.hpp"

namespace py = pybind11;
using namespace tickms;

namespace {

std::vector<SpreadState> to_spreads(const std::vector<int>& raw) {
  std::vector<SpreadState> spreads;
  spreads.reserve(raw.size());
  for (int s : raw) spreads.push_back(SpreadState(s));
  return spreads;
}

std::vector<Return> to_returns(const std::vector<int>& raw) {
  std::vector<Return> returns;
  returns.reserve(raw.size());
  for (int r : raw) returns.push_back(Return(r));
  return returns;
}

TickSeries series_from_lists(const std::vector<int>& spreads, const std::vector<int>& returns) {
  return TickSeries::single_segment(to_spreads(spreads), to_returns(returns));
}

py::dict simulate_to_dict(const SimConfig& config) {
  const SimPath path = simulate_path(config);
  std::vector<int> spreads, transitions, returns;
  spreads.reserve(path.spreads.size());
  for (const SpreadState& s : path.spreads) spreads.push_back(s.ticks());
  transitions.reserve(path.transitions.size());
  for (const TransitionState& x : path.transitions) transitions.push_back(x.value());
  returns.reserve(path.returns.size());
  for (const Return& r : path.returns) returns.push_back(r.half_ticks());
  py::dict out;
  out["spreads"] = std::move(spreads);
  out["transitions"] = std::move(transitions);
  out["returns"] = std::move(returns);
  out["seed_used"] = path.seed_used;
  return out;
}

SimConfig make_config(Model model, std::variant<MsParams, DcmmParams> params,
                      std::size_t length, std::uint64_t seed,
                      std::optional<std::size_t> burn_in) {
  SimConfig config;
  config.model = model;
  config.params = std::move(params);
  config.length = length;
  config.seed = seed;
  config.burn_in = burn_in;
  config.n_runs = 1;
  config.validate();
  return config;
}

void set_optional(py::dict& out, const char* key, const std::optional<double>& value) {
  if (value) {
    out[key] = *value;
  } else {
    out[key] = py::none();
  }
}

py::dict symmetry_to_dict(const SymmetryCheck& check) {
  py::dict out;
  out["plus_two"] = check.plus_two;
  out["minus_two"] = check.minus_two;
  set_optional(out, "z", check.z);
  out["flagged"] = check.flagged;
  return out;
}

}  // namespace

PYBIND11_MODULE(_tickms, m) {
  m.doc() = "Markov-switching and double-chain models for large-tick assets";

  py::class_<SpreadChainParams>(m, "SpreadChain")
      .def_readonly("p11", &SpreadChainParams::p11)
      .def_readonly("p21", &SpreadChainParams::p21)
      .def_readonly("bernoulli_p", &SpreadChainParams::bernoulli_p)
      .def("stationary",
           [](const SpreadChainParams& chain) {
             const Eigen::VectorXd v = chain.spread_stationary().vector();
             return std::vector<double>(v.data(), v.data() + v.size());
           })
      .def("__repr__", [](const SpreadChainParams& chain) {
        if (chain.bernoulli_p) {
          return "SpreadChain(bernoulli_p=" + std::to_string(*chain.bernoulli_p) + ")";
        }
        return "SpreadChain(p11=" + std::to_string(chain.p11) +
               ", p21=" + std::to_string(chain.p21) + ")";
      });

  m.def(
      "spread_chain",
      [](double p11, double p21) { return SpreadChainParams::markov(p11, p21); },
      py::arg("p11"), py::arg("p21"),
      "Two-state spread chain with stay probabilities p11 and p21.");
  m.def(
      "bernoulli_chain", [](double p) { return SpreadChainParams::bernoulli(p); },
      py::arg("p"), "Independent spread draws: spread 1 with probability p.");

  py::class_<MsParams>(m, "MsParams")
      .def(py::init([](const SpreadChainParams& chain, double theta1, double theta4) {
             MsParams params;
             params.chain = chain;
             params.theta1 = theta1;
             params.theta4 = theta4;
             params.validate();
             return params;
           }),
           py::arg("chain"), py::arg("theta1"), py::arg("theta4"))
      .def_readonly("chain", &MsParams::chain)
      .def_readonly("theta1", &MsParams::theta1)
      .def_readonly("theta4", &MsParams::theta4);

  py::class_<DcmmParams>(m, "DcmmParams")
      .def(py::init([](const SpreadChainParams& chain, double alpha1,
                       const std::vector<double>& beta1, double theta4) {
             DcmmParams params;
             params.chain = chain;
             params.p = static_cast<int>(beta1.size());
             params.alpha1 = alpha1;
             params.beta1 = beta1;
             params.theta4 = theta4;
             params.validate();
             return params;
           }),
           py::arg("chain"), py::arg("alpha1"), py::arg("beta1"), py::arg("theta4"))
      .def_readonly("chain", &DcmmParams::chain)
      .def_readonly("p", &DcmmParams::p)
      .def_readonly("alpha1", &DcmmParams::alpha1)
      .def_readonly("beta1", &DcmmParams::beta1)
      .def_readonly("theta4", &DcmmParams::theta4);

  m.def(
      "simulate",
      [](const MsParams& params, std::size_t length, std::uint64_t seed,
         std::optional<std::size_t> burn_in) {
        const Model model = params.chain.bernoulli_p ? Model::MsBernoulli : Model::Ms;
        return simulate_to_dict(make_config(model, params, length, seed, burn_in));
      },
      py::arg("params"), py::arg("length"), py::arg("seed") = 0,
      py::arg("burn_in") = py::none(),
      "Simulate a switching-model path; returns spreads, transitions, returns.");
  m.def(
      "simulate",
      [](const DcmmParams& params, std::size_t length, std::uint64_t seed,
         std::optional<std::size_t> burn_in) {
        return simulate_to_dict(make_config(Model::Dcmm, params, length, seed, burn_in));
      },
      py::arg("params"), py::arg("length"), py::arg("seed") = 0,
      py::arg("burn_in") = py::none(),
      "Simulate a double-chain path; returns spreads, transitions, returns.");

  m.def("transition_stationary",
        [](const SpreadChainParams& chain) {
          const Eigen::VectorXd v = build_transition_chain(chain).second.vector();
          return std::vector<double>(v.data(), v.data() + v.size());
        },
        py::arg("chain"),
        "Stationary law of the four-state transition chain.");

  m.def("acf_returns", &acf_returns, py::arg("params"), py::arg("tau"),
        "Autocorrelation of returns under the switching model.");
  m.def("acf_squared", &acf_squared, py::arg("params"), py::arg("tau"),
        "Autocorrelation of squared returns under the switching model.");
  m.def("acf_squared_dcmm", &acf_squared_dcmm, py::arg("params"), py::arg("tau"),
        "Autocorrelation of squared returns under the double chain.");
  m.def("e3_closed_form", &e3_closed_form, py::arg("params"),
        "Decay eigenvalue of the order-1 squared-return chain.");

  m.def("moments",
        [](const MsParams& params) {
          const MomentSet moments = unconditional_moments(params);
          py::dict out;
          out["e_r2"] = moments.e_r2;
          out["e_r4"] = moments.e_r4;
          out["var_r"] = moments.var_r;
          out["var_r2"] = moments.var_r2;
          out["excess_kurtosis"] = moments.excess_kurtosis;
          return out;
        },
        py::arg("params"), "Unconditional return moments of the switching model.");

  m.def(
      "estimate_counts",
      [](const std::vector<int>& spreads, const std::vector<int>& returns) {
        const CountEstimates counts = estimate_counts(series_from_lists(spreads, returns));
        py::dict out;
        out["n_spread"] = counts.n_spread;
        out["n1"] = counts.n1;
        out["n11"] = counts.n11;
        out["n12"] = counts.n12;
        out["n21"] = counts.n21;
        out["n22"] = counts.n22;
        out["zeros_regime1"] = counts.zeros_regime1;
        out["total_regime1"] = counts.total_regime1;
        out["zeros_regime4"] = counts.zeros_regime4;
        out["total_regime4"] = counts.total_regime4;
        set_optional(out, "pi1_hat", counts.pi1_hat);
        set_optional(out, "pi1_se", counts.pi1_se);
        set_optional(out, "p11_hat", counts.p11_hat);
        set_optional(out, "p11_se", counts.p11_se);
        set_optional(out, "p21_hat", counts.p21_hat);
        set_optional(out, "p21_se", counts.p21_se);
        set_optional(out, "theta1_hat", counts.theta1_hat);
        set_optional(out, "theta1_se", counts.theta1_se);
        set_optional(out, "theta4_hat", counts.theta4_hat);
        set_optional(out, "theta4_se", counts.theta4_se);
        out["symmetry_regime1"] = symmetry_to_dict(counts.symmetry_regime1);
        out["symmetry_regime4"] = symmetry_to_dict(counts.symmetry_regime4);
        return out;
      },
      py::arg("spreads"), py::arg("returns"),
      "Count-based estimates over one contiguous path; spreads holds one more "
      "entry than returns.");

  m.def(
      "logit_sample",
      [](const std::vector<int>& spreads, const std::vector<int>& returns, int p) {
        const LogitSample sample = logit_sample(series_from_lists(spreads, returns), p);
        std::vector<int> binary;
        binary.reserve(sample.binary.size());
        for (const BinaryMove& b : sample.binary) binary.push_back(b.value());
        std::vector<std::vector<int>> windows;
        windows.reserve(sample.windows.size());
        for (const SquaredReturnWindow& w : sample.windows) {
          std::vector<int> row;
          row.reserve(static_cast<std::size_t>(p));
          for (int lag = 1; lag <= p; ++lag) row.push_back(w.at_lag(lag));
          windows.push_back(std::move(row));
        }
        return py::make_tuple(std::move(binary), std::move(windows));
      },
      py::arg("spreads"), py::arg("returns"), py::arg("p"),
      "Constant-spread observations for the order-p logit: (outcomes, lag "
      "windows), window column l holding the squared return at lag l.");

  m.def(
      "fit_logit",
      [](const std::vector<int>& binary, const std::vector<std::vector<int>>& windows,
         int p) {
        std::vector<BinaryMove> outcomes;
        outcomes.reserve(binary.size());
        for (int b : binary) outcomes.push_back(BinaryMove(b));
        std::vector<SquaredReturnWindow> lagged;
        lagged.reserve(windows.size());
        for (const std::vector<int>& row : windows) {
          // at_lag(1) is the most recent value and sits last in storage
          std::vector<int> oldest_first(row.rbegin(), row.rend());
          lagged.push_back(SquaredReturnWindow(std::move(oldest_first)));
        }
        const LogitFit fit = fit_logit_irls(outcomes, lagged, p);
        py::dict out;
        out["alpha1"] = fit.alpha1;
        out["beta1"] = fit.beta1;
        out["std_errors"] = fit.std_errors;
        out["z_values"] = fit.z_values;
        out["log_likelihood"] = fit.log_likelihood;
        out["converged"] = fit.converged;
        out["iterations"] = fit.iterations;
        out["diagnostic"] = fit.diagnostic;
        return out;
      },
      py::arg("binary"), py::arg("windows"), py::arg("p"),
      "Maximum-likelihood logit fit; windows as produced by logit_sample.");

  m.def(
      "sample_acf",
      [](const std::vector<double>& series, long max_lag, double z) {
        const AcfEstimate acf = sample_acf(series, max_lag, z);
        py::dict out;
        out["lags"] = acf.lags;
        out["values"] = acf.values;
        out["n"] = acf.n;
        out["noise_band"] = acf.noise_band;
        return out;
      },
      py::arg("series"), py::arg("max_lag"), py::arg("z") = 2.0,
      "Sample autocorrelation over lags 0..max_lag with a white-noise band.");

  m.def(
      "aggregate_stats",
      [](const std::vector<int>& returns, long dt, bool overlapping) {
        const AggregateStats stats = aggregate_stats(to_returns(returns), dt, overlapping);
        py::dict out;
        out["dt"] = stats.dt;
        out["sigma"] = stats.sigma;
        out["sigma_n"] = stats.sigma_n;
        out["kappa"] = stats.kappa;
        out["histogram"] = stats.histogram;
        return out;
      },
      py::arg("returns"), py::arg("dt"), py::arg("overlapping") = true,
      "Dispersion and excess kurtosis of dt-aggregated returns.");

  m.def(
      "fit_power_law",
      [](const std::vector<double>& values, const std::vector<long>& indices, long lo,
         long hi) {
        const PowerLawFit fit = fit_power_law(values, indices, {lo, hi});
        py::dict out;
        out["exponent"] = fit.exponent;
        out["exponent_se"] = fit.exponent_se;
        out["window"] = py::make_tuple(fit.range.first, fit.range.second);
        out["n_points"] = fit.n_points;
        out["excluded"] = fit.excluded;
        return out;
      },
      py::arg("values"), py::arg("indices"), py::arg("lo"), py::arg("hi"),
      "Least-squares power-law exponent of values over the index window.");

  m.def("significance_stars", &significance_stars, py::arg("z"),
        "Star notation for a z statistic at the 5, 1, and 0.1 percent levels.");
}
