"""Loop calculus for binary planar graphical models.

Belief propagation gives the Bethe estimate Z_BP; the sum of all 2-regular
loop corrections z_empty follows from one Pfaffian of a Kasteleyn-oriented
extended graph; the Pfaffian series over even triplet subsets recovers Z
exactly. Brute-force oracles for every stage live next to the fast paths.
"""

from .bp import BPConfig, BPResult, bethe_log_z, loop_vertex_term, run_bp
from .errors import (
    DanglingEdge,
    DegenerateBeliefWarning,
    DegreeTooHigh,
    DomainError,
    InconsistentRotation,
    InvalidGraph,
    LoopCalcError,
    MalformedTable,
    NonPlanarEmbedding,
    NonPositiveSumWarning,
    NotSkew,
    NumericalUnderflow,
    OddDimension,
    OddPsi,
    PsiNotTriplet,
    TooLarge,
    ZeroDenominator,
    ZeroPartition,
)
from .experiments import ExperimentConfig, ExperimentResult, error_metric, run_experiment
from .extended import (
    ExtendedGraph,
    KasteleynOrientation,
    check_kasteleyn,
    enumerate_perfect_matchings,
    fisher_extend,
    kasteleyn_orient,
    perfect_matching_sum,
)
from .forney import (
    ForneyGraph,
    InteractionNode,
    VariableEdge,
    build_forney_graph,
    contract_log_z,
    exact_log_z,
    load_graph,
    save_graph,
    two_core,
)
from .ising import IsingCouplings, IsingParams, ising_grid_forney, ising_log_z, sample_couplings
from .loops import (
    GeneralizedLoop,
    LoopTerm,
    enumerate_generalized_loops,
    loop_terms,
    loop_weight,
    search_generalized_loops,
    truncated_loop_series,
    two_regular_filter,
)
from .pfaffian import pfaffian, pfaffian_pairings, slogpf
from .series import PfaffianTerm, SeriesLimits, SeriesResult, pfaffian_term, run_series, z_empty

__version__ = "0.1.0"
