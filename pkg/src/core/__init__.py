"""
Stable-Limit SDE Lab - Core Package
"""
__version__ = "1.0.0"

from .config import validate_config  # noqa: E402
from .exceptions import SimulationError  # noqa: E402
from .models.schemas import (  # noqa: E402
    ExperimentConfig,
    ExperimentName,
    GeneratorEvalReport,
    RunManifest,
    WeakErrorPoint,
    WeakErrorReport,
)
from .runner import ExperimentRunner, run  # noqa: E402

__all__ = [
    "ExperimentConfig",
    "ExperimentName",
    "ExperimentRunner",
    "GeneratorEvalReport",
    "RunManifest",
    "SimulationError",
    "WeakErrorPoint",
    "WeakErrorReport",
    "run",
    "validate_config",
    "__version__",
]
