from .config import ExperimentConfig, config_keys, load_config
from .experiment import run_experiment
from .frame import DetectorCounts, FrameOutcome, frame_rng, run_frame
from .results import SerRecord, SerResult, clopper_pearson, read_results, write_results

__all__ = [
    "DetectorCounts",
    "ExperimentConfig",
    "FrameOutcome",
    "SerRecord",
    "SerResult",
    "clopper_pearson",
    "config_keys",
    "frame_rng",
    "load_config",
    "read_results",
    "run_experiment",
    "run_frame",
    "write_results",
]
