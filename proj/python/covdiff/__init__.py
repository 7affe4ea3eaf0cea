"""Two-sample covariance equality testing and block-FDR variable clustering.

The heavy lifting lives in the compiled extension ``covdiff._covdiff``; this
package re-exports its functions under a stable name.
"""

from ._covdiff import (
    DegeneracyError,
    InputError,
    NotPsdError,
    ValidationError,
    bh_adjust,
    bootstrap_distribution,
    cluster,
    clx_quantile,
    clx_test,
    cut_tree,
    gen_covariance,
    gen_sample,
    moment_summary,
    pair_t_matrix,
    run_experiment,
    two_sample_test,
)

__all__ = [
    "DegeneracyError",
    "InputError",
    "NotPsdError",
    "ValidationError",
    "bh_adjust",
    "bootstrap_distribution",
    "cluster",
    "clx_quantile",
    "clx_test",
    "cut_tree",
    "gen_covariance",
    "gen_sample",
    "moment_summary",
    "pair_t_matrix",
    "run_experiment",
    "two_sample_test",
]

__version__ = "1.0.0"
