"""Performance model for QKD links sharing fiber with coherent classical channels."""
from .fiber import BUILTIN_FIBERS, FiberProfile, WavelengthContext, get_fiber, transmission
from .kernels import BACKEND
from .qkd import DetectorModel, ProtocolKind, ProtocolParams, RateBreakdown, link_reach, optimize_mu
from .scenario import LinkScenario, ScenarioError, load_preset, load_scenario
from .sweep import SweepRecord, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BUILTIN_FIBERS", "DetectorModel", "FiberProfile", "LinkScenario",
    "ProtocolKind", "ProtocolParams", "RateBreakdown", "ScenarioError", "SweepRecord",
    "WavelengthContext", "get_fiber", "link_reach", "load_preset", "load_scenario",
    "optimize_mu", "run_sweep", "transmission",
]
