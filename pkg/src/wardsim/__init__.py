"""wardsim: discrete-event simulation toolkit for ward capacity planning.

Two models ship with the package: a critical care unit bed model with
elective balking and priority queueing, and an acute-stroke/rehabilitation
pathway model with infinite-capacity occupancy analysis. Both follow the
experiment pattern (parameters fully separated from model logic), use one
dedicated pseudorandom stream per sampling activity, and support warm-up
handling, multiple replications and single-axis scenario sweeps.
"""

__version__ = "0.1.0"

from .ccu import CcuExperiment
from .engine import Acquire, CountedResource, Engine, Grant, Timeout, Trace
from .errors import ConfigError
from .experiment import (
    DelayCurve,
    Experiment,
    OccupancyDistribution,
    ReplicationResult,
    ResultSet,
    ScenarioResult,
    ScenarioSummary,
    run_replication,
    run_replications,
    run_scenarios,
    run_single,
)
from .sampling import (
    Deterministic,
    Discrete,
    Distribution,
    Exponential,
    LognormalMeanSd,
    Triangular,
    Uniform,
    lognormal_mu_sigma,
    spawn_streams,
)
from .stroke import PatientTypeParams, StrokeExperiment, prob_delay

__all__ = [
    "__version__",
    "Acquire",
    "CcuExperiment",
    "ConfigError",
    "CountedResource",
    "DelayCurve",
    "Deterministic",
    "Discrete",
    "Distribution",
    "Engine",
    "Experiment",
    "Exponential",
    "Grant",
    "LognormalMeanSd",
    "OccupancyDistribution",
    "PatientTypeParams",
    "ReplicationResult",
    "ResultSet",
    "ScenarioResult",
    "ScenarioSummary",
    "StrokeExperiment",
    "Timeout",
    "Trace",
    "Triangular",
    "Uniform",
    "lognormal_mu_sigma",
    "prob_delay",
    "run_replication",
    "run_replications",
    "run_scenarios",
    "run_single",
    "spawn_streams",
]
