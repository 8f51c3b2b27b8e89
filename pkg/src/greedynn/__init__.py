"""Greedy training of shallow ReLU^k networks over discrete dictionaries."""

import os

# the TBB layer shipped here is too old for numba; avoid the probe warning
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .dictionary import (Dictionary, DictionaryAtom, ParamSpace, build_deterministic,  # noqa: E402
                         hyperspherical_map, sample_randomized)
from .greedy import RunConfig, estimate_gamma, run, run_oga, run_wrga  # noqa: E402

__version__ = "0.1.0"
