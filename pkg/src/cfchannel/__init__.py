"""Channel-coding model of collaborative filtering.

Block-constant rating matrices observed through a discrete memoryless
channel with erasures, the cluster-then-decode estimator, and the analytic
error bounds and cluster-size thresholds that go with them.
"""

from .bounds import (
    bernoulli_kl,
    binary_report,
    chernoff_c1,
    clustering_bound,
    exact_fill_error,
    solve_hstar,
    weighted_hoeffding,
)
from .channel import ERASED, ChannelSpec, bsc_spec, channel_stats, dmc_spec, transmit
from .clustering import cluster_axis, default_threshold, pair_stats, pairwise_errors
from .decode import (
    ImpossibleObservationError,
    block_error,
    estimate_matrix,
    majority_decode,
    ml_decode,
)
from .harness import (
    ExperimentConfig,
    derive_trial_seed,
    emit_outputs,
    figure1_curves,
    run_monte_carlo,
    run_trial,
    sweep,
)
from .model import (
    Alphabet,
    Partition,
    effective_stats,
    generate_instance,
    lemma1_bound,
    uniform_partition,
)

__version__ = "0.1.0"
