"""Walk kernel backends.

The compiled Cython core is preferred; the pure-Python twin is the
fallback and the semantic reference.  Both produce bit-identical
trajectories for the same seeds.  Set TRAPKIT_FORCE_PYTHON_KERNEL=1 to
force the fallback (used by the benchmark and parity tests).
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _walk_py

try:
    from . import _walk_cy
except ImportError:  # pragma: no cover - depends on the build
    _walk_cy = None

if _walk_cy is not None and not os.environ.get("TRAPKIT_FORCE_PYTHON_KERNEL"):
    _impl = _walk_cy
    BACKEND = "cython"
else:
    _impl = _walk_py
    BACKEND = "python"

VARIANT_CODES = {"bouchaud": 0, "metropolis": 1, "heat_bath": 2}


def backend_for(name: str):
    if name == "cython":
        if _walk_cy is None:
            raise RuntimeError("compiled kernel is not available")
        return _walk_cy
    if name == "python":
        return _walk_py
    raise ValueError(f"unknown backend {name!r}")


def run_walk(
    env,
    spec,
    *,
    max_steps: int | None = None,
    max_time: float | None = None,
    hold_seed: int,
    move_seed: int,
    time_change: bool = True,
    deep_threshold: float = math.inf,
    max_deep: int = 0,
    intervals_traps: int = 0,
    max_intervals: int = 4096,
    max_depths: int = 0,
    clock_queries=None,
    xtime_queries=None,
    record_path: bool = False,
    kill_radius: int = -1,
    backend=None,
) -> dict:
    """Simulate one walk in the given environment; see the kernel docs.

    ``env`` must use the exact Pareto law (the kernels generate depths
    inline).  Exactly one of ``max_steps``/``max_time`` may be left None.
    """
    if not env.uses_exact_pareto:
        raise ValueError("kernels support only the exact Pareto depth law")
    if max_steps is None and max_time is None:
        raise ValueError("need a stop bound: max_steps and/or max_time")
    if max_steps is None:
        max_steps = 2**62
    if max_time is None:
        max_time = math.inf
    if max_steps <= 0 or max_time <= 0:
        raise ValueError("stop bounds must be positive")
    if record_path and max_steps > 50_000_000:
        raise ValueError("record_path requires a finite, moderate max_steps")
    for q in (clock_queries, xtime_queries):
        if q is not None and np.any(np.diff(np.asarray(q, dtype=float)) < 0):
            raise ValueError("query times must be sorted ascending")
    impl = _impl if backend is None else backend_for(backend)
    return impl.simulate(
        env.params.d,
        env.params.seed,
        np.array(env.origin_offset, dtype=np.int64),  # writable copy for the memoryview
        env.params.alpha,
        VARIANT_CODES[spec.kind],
        spec.a if spec.a is not None else 0.0,
        time_change,
        max_steps,
        float(max_time),
        hold_seed,
        move_seed,
        deep_threshold=deep_threshold,
        max_deep=max_deep,
        intervals_traps=intervals_traps,
        max_intervals=max_intervals,
        max_depths=max_depths,
        clock_queries=clock_queries,
        xtime_queries=xtime_queries,
        record_path=record_path,
        kill_radius=kill_radius,
    )
