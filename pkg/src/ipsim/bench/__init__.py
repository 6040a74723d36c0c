"""Experiment configs, verification suites, output writers and the ``ipsim`` CLI."""
from .config import ConfigError, ExperimentConfig
from .emit import emit
from .runner import CSV_FIELDS, ResultRow, run
from .verify import SUITES, verify
