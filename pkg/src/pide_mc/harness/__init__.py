"""Experiment harness: error measurement, sweeps, reference runs, CSV output and the CLI."""
from .errors import DEFAULT_N_EVAL, ErrorReport, l2_error
from .io import emit_csv, read_csv, read_manifest, read_snapshot, write_manifest, write_snapshot
from .reference import load_reference, reference_solution
from .sweep import SweepAxis, SweepResult, fit_slope, pairwise_rates, run_sweep

__all__ = [
    "DEFAULT_N_EVAL",
    "ErrorReport",
    "l2_error",
    "emit_csv",
    "read_csv",
    "read_manifest",
    "read_snapshot",
    "write_manifest",
    "write_snapshot",
    "load_reference",
    "reference_solution",
    "SweepAxis",
    "SweepResult",
    "fit_slope",
    "pairwise_rates",
    "run_sweep",
]
