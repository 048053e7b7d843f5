"""Markov-switching and double-chain models for large-tick assets.

The heavy lifting lives in the compiled extension; this package re-exports
its surface under a stable name. Installed builds place the extension inside
the package; in-tree test runs put it on the path as a top-level module.
"""

try:
    from . import _tickms
except ImportError:  # build-tree layout
    import _tickms

DcmmParams = _tickms.DcmmParams
MsParams = _tickms.MsParams
SpreadChain = _tickms.SpreadChain
acf_returns = _tickms.acf_returns
acf_squared = _tickms.acf_squared
acf_squared_dcmm = _tickms.acf_squared_dcmm
aggregate_stats = _tickms.aggregate_stats
bernoulli_chain = _tickms.bernoulli_chain
e3_closed_form = _tickms.e3_closed_form
estimate_counts = _tickms.estimate_counts
fit_logit = _tickms.fit_logit
fit_power_law = _tickms.fit_power_law
logit_sample = _tickms.logit_sample
moments = _tickms.moments
sample_acf = _tickms.sample_acf
significance_stars = _tickms.significance_stars
simulate = _tickms.simulate
spread_chain = _tickms.spread_chain
transition_stationary = _tickms.transition_stationary

__version__ = "0.1.0"

__all__ = [
    "DcmmParams",
    "MsParams",
    "SpreadChain",
    "acf_returns",
    "acf_squared",
    "acf_squared_dcmm",
    "aggregate_stats",
    "bernoulli_chain",
    "e3_closed_form",
    "estimate_counts",
    "fit_logit",
    "fit_power_law",
    "logit_sample",
    "moments",
    "sample_acf",
    "significance_stars",
    "simulate",
    "spread_chain",
    "transition_stationary",
]
