"""Change point detection and network estimation for nonnegative multivariate time series."""

from ._core import (
    AtlasMismatchError,
    DataError,
    DegenerateSegmentError,
    DimensionError,
    Error,
    ParameterError,
    ParseError,
    RangeError,
    RankError,
    RescaleError,
    SingularReconstructionError,
    SpecError,
    bh_adjust,
    cluster_assign,
    consensus_matrix,
    detect_cps,
    est_net,
    export_network,
    kld_loss,
    ks_test,
    nmf_fit,
    opt_rank,
    rank_sum_test,
    rescale,
    simulate,
    welch_t_test,
)

__version__ = "0.1.0"
