"""Nash equilibria of graphon games and least-squares estimation of payoff
parameters from observed equilibrium play."""

from .errors import (
    ConfigError,
    DegenerateAggregate,
    EmptyGroup,
    EmptyVector,
    GraphonGameError,
    InfeasibleParameterSet,
    MalformedPartition,
    NoConvergence,
    NoStart,
    NotAContraction,
    NotInterior,
    OutOfDomain,
    ParameterOutOfBox,
    SingularSystem,
    SpectralConditionViolated,
)
from .functionspace import (
    PiecewiseConstantFn,
    cell_integrals,
    integrate_product,
    interpolate_equilibrium,
    l2_distance,
    make_piecewise,
    merge_breakpoints,
    sup_distance,
)
from .graphon import (
    ConstantGraphon,
    Graphon,
    GridGraphon,
    SBMGraphon,
    power_iteration_max_eig,
)
from .game import (
    GameSpec,
    LQHomogeneous,
    LQSBM,
    ParameterBox,
    StrategySet,
    best_response,
    contraction_margin,
    lq_payoff,
    theta_of_eta,
)
from .equilibrium import (
    BlockEquilibrium,
    GraphonEquilibrium,
    equilibrium_gradient,
    equilibrium_second_derivatives,
    solve_best_response,
    solve_fixed_point,
    solve_lq_homogeneous,
    solve_lq_sbm,
)
from .sampling import (
    NetworkEquilibrium,
    SampledNetwork,
    observe,
    read_network,
    sample_network,
    solve_network_game,
    write_network,
)
from .estimator import (
    EstimateOptions,
    EstimationResult,
    HessianInfo,
    estimate,
    hessian,
    model_equilibrium_fn,
    objective,
    objective_gradient,
)
from .diagnostics import (
    IdentifiabilityReport,
    check_interior,
    empirical_identifiability_test,
    fd_check,
    homogeneous_identifiability,
    sbm_identifiability_constant,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    SolverOptions,
    derive_run_seed,
    load_config,
    run_experiment,
    summarize_quantiles,
    write_quantiles_csv,
    write_records_csv,
)

__version__ = "0.1.0"
