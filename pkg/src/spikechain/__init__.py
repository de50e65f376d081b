"""spikechain: exact sampling and experiments for interacting spiking chains
with variable-length memory.

The library has three layers:

- model definition and analytic validation (``models``, ``analysis``);
- the convex finite-range decomposition of the spiking kernel and the
  backward perfect sampler built on it (``kalikow``, ``perfect``), plus
  the forward simulator with exact small-system oracles (``forward``);
- critical random synaptic graphs and the inter-spike-interval statistics
  they were designed to probe (``graphs``, ``stats``).

``cli`` wires everything into reproducible, manifest-tracked runs.
"""

from .analysis import (
    DeltaStarResult,
    MgfResult,
    NonFiniteConstant,
    RegimeMismatch,
    SeriesDiverges,
    ValidationReport,
    C_gamma,
    E_G_delta,
    G_cumulative,
    delta_star,
    e_delta,
    mgf_rho,
    reproduction_mean,
    validate_model,
)
from .fields import SpikeField
from .forward import (
    ChainState,
    MarkovOracle,
    StateSpaceTooLarge,
    UnboundedMemory,
    exact_stationary,
    initial_state,
    isi_moments,
    simulate,
    step,
)
from .graphs import (
    SynapticGraph,
    estimate_tau_cdf,
    event_A,
    return_time_tau,
    sample_er_digraph,
    tau_tail_bound,
)
from .kalikow import (
    KalikowWeights,
    NotAttractive,
    ResidualMassTooLarge,
    SiteTimeContext,
    ZeroMass,
    lambda_bar,
    lambda_spacetime,
    lambda_weights,
    p_k_conditional,
    r_bounds,
    reconstruct_transition,
    spacetime_weights,
)
from .models import (
    AgingDescriptor,
    MalformedSpec,
    ModelSpec,
    PhiDescriptor,
    exponential_memory_preset,
    graph_model,
    independent_preset,
    three_neuron_preset,
    two_neuron_preset,
    zd_window_preset,
)
from .perfect import (
    BudgetExceeded,
    Clan,
    IncompleteClan,
    ScanCapExceeded,
    clan_of_ancestors,
    forward_coloring,
    last_spontaneous,
    perfect_sample,
    spacetime_clan,
    spacetime_sample,
    xi_at,
)
from .rng import RandomCoordinateSource
from .stats import (
    ConditioningTooRare,
    SpikeTrainStats,
    TooFewSpikes,
    adjacent_isi_covariance,
    extract_spikes,
    locality_check,
    loss_of_memory_profile,
    spike_train_stats,
    theorem4_bound,
    theorem4_experiment,
)

__version__ = "0.1.0"
