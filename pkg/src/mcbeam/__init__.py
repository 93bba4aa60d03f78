"""Joint multicast beamforming and user scheduling.

Given per-user, per-channel vector channels, find per-channel multicast
beamformers and a user-to-channel assignment minimizing total transmit
power under per-user QoS constraints. Two routes are provided: a lifted
convex relaxation with randomized rank-one recovery (a lower bound plus
a feasible point), and an iterative convex restriction with an
accelerated dual inner solver (fast, scales to large arrays). A seeded
Monte-Carlo harness sweeps problem sizes and reports ratio statistics
and per-method powers as CSV.
"""

from ._core import backend
from .baselines import BaselineResult, equipartition, one_group
from .channel import (
    GENERAL,
    HOMOGENEOUS,
    ChannelGenConfig,
    ChannelSet,
    generate,
    load,
    save,
)
from .errors import (
    ConvergenceError,
    DegenerateInput,
    InvalidInput,
    InvalidState,
    ParseError,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    RatioStats,
    aggregate,
    db_convert,
    load_config,
    parse_config,
    run_experiment,
)
from .linalg import EigDecomposition, herm_eig, lambda_max, psd_project
from .sca import (
    Linearization,
    QpInstance,
    SolveReport,
    build_qp,
    channel_gains,
    dfgp_solve,
    linearize,
    make_feasible_start,
    margin_subgradient,
    sca_solve,
    user_margin,
)
from .sdr import (
    RandomizationResult,
    Schedule,
    SdrSolution,
    extract_schedule,
    power_scale,
    randomize,
    ratio_bound,
    sdr_solve,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineResult",
    "ChannelGenConfig",
    "ChannelSet",
    "ConvergenceError",
    "DegenerateInput",
    "EigDecomposition",
    "ExperimentConfig",
    "ExperimentResult",
    "GENERAL",
    "HOMOGENEOUS",
    "InvalidInput",
    "InvalidState",
    "Linearization",
    "ParseError",
    "QpInstance",
    "RandomizationResult",
    "RatioStats",
    "Schedule",
    "SdrSolution",
    "SolveReport",
    "aggregate",
    "backend",
    "build_qp",
    "channel_gains",
    "db_convert",
    "dfgp_solve",
    "equipartition",
    "extract_schedule",
    "generate",
    "herm_eig",
    "lambda_max",
    "linearize",
    "load",
    "load_config",
    "make_feasible_start",
    "margin_subgradient",
    "one_group",
    "parse_config",
    "power_scale",
    "psd_project",
    "randomize",
    "ratio_bound",
    "run_experiment",
    "save",
    "sca_solve",
    "sdr_solve",
    "user_margin",
]
