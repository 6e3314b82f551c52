"""
timebin - Time-bin Switch Entangler Simulator
Sparse Fock-state optics, Monte-Carlo gated detection and the experiment
pipelines built on them
"""

__version__ = "1.0.0"

# Simple accessors
def get_config():
    from .config import TimebinConfig
    return TimebinConfig

def get_experiment_config():
    from .experiments import ExperimentConfig
    return ExperimentConfig

# For direct access if needed
try:
    from .config import TimebinConfig, ConfigurationFactory, TimebinError, load_config
    from .fock_core import ModeLabel, OccupationVector, PureState
    from .experiments import ExperimentConfig, run_entangler, hom_scan, fringe_scan, delay_scan
except ImportError:
    # Modules can still be imported individually
    pass
