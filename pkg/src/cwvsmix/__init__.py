"""Critical-window variable selection for time-varying exposure mixtures."""

__version__ = "0.1.0"

from .errors import InputError, NumericalError
from .model import ExposureDataset, Priors, iqr_standardize, log_likelihood
from .rng import RngStream
from .sampler import ChainSamples, SweepConfig, run_chain
from .inference import decide_windows, geweke_diagnostic, select_weights
from .simulation import SimScenario, generate_dataset, run_ew_baseline, run_study

__all__ = [
    "ChainSamples",
    "ExposureDataset",
    "InputError",
    "NumericalError",
    "Priors",
    "RngStream",
    "SimScenario",
    "SweepConfig",
    "decide_windows",
    "generate_dataset",
    "geweke_diagnostic",
    "iqr_standardize",
    "log_likelihood",
    "run_chain",
    "run_ew_baseline",
    "run_study",
    "select_weights",
]
