"""Learned-index and tree-index microbenchmark core.

Everything here is a thin veneer over the compiled module: in-memory
indexes, deterministic workload generation, pipeline-slot attribution, and
the single-run experiment driver.
"""

from ._imb import (
    Index,
    attribution,
    builtin_mix,
    generate_workload,
    run_experiment,
)

__all__ = [
    "Index",
    "attribution",
    "builtin_mix",
    "generate_workload",
    "run_experiment",
]
