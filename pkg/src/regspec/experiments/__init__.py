"""Experiment runners; each takes an ExperimentConfig and returns an ExperimentReport."""
from .dbm import run_dbm
from .local_law import run_local_law
from .rigidity import run_ramanujan, run_rigidity
from .switching import verify_switching
from .universality import run_universality

RUNNERS = {
    "rigidity": run_rigidity,
    "ramanujan": run_ramanujan,
    "universality": run_universality,
    "local-law": run_local_law,
    "dbm": run_dbm,
    "verify-switching": verify_switching,
}

__all__ = ["RUNNERS", "run_dbm", "run_local_law", "run_ramanujan", "run_rigidity",
           "run_universality", "verify_switching"]
