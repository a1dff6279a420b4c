"""Extended Wigner's friend simulation, Local Friendliness feasibility, and
fault-tolerant resource estimation."""

from lfsim.behavior import Behavior, chsh_value, max_chsh
from lfsim.estimator import EstimatorInputs, full_report
from lfsim.ewfs import ScenarioConfig, behavior
from lfsim.lfpoly import hull_membership, lf_feasible

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "EstimatorInputs",
    "ScenarioConfig",
    "behavior",
    "chsh_value",
    "full_report",
    "hull_membership",
    "lf_feasible",
    "max_chsh",
]
