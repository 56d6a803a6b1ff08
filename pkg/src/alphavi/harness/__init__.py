from .config import ConfigError, ExperimentConfig
from .experiments import run_gaussian, run_logreg, run_weight_collapse
