"""Configuration, eps sweeps, the check suite and the command line."""

from .config import ConfigError, RunConfig, check_resolution, load_config
from .experiments import CheckReport, run_checks, run_convergence
from .records import RunRecord, Sample, emit_csv, read_csv

__all__ = ["ConfigError", "RunConfig", "check_resolution", "load_config", "CheckReport",
           "run_checks", "run_convergence", "RunRecord", "Sample", "emit_csv", "read_csv"]
