"""Config-driven experiment runner and CLI."""

from .config import ExperimentConfig, config_from_dict, load_config
from .experiments import SpectraOutput, run_regression, run_selection_report, run_spectra
