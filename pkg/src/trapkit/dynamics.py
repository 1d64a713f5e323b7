"""Continuous-time dynamics: rates, conductances, walks and clocks.

The walk X jumps from x to a neighbour y at rate tau_y^a / tau_x^(1-a)
(or the Metropolis / heat-bath analogue); the time-changed walk X-hat
carries the symmetric edge conductances and X is recovered as X-hat
composed with the inverse clock A^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .env import GOLDEN64, MASK64, Environment, mix64


@dataclass(frozen=True)
class DynamicsSpec:
    """Dynamics variant: 'bouchaud' (with a in [0,1]), 'metropolis', 'heat_bath'."""

    kind: str = "bouchaud"
    a: float | None = None

    def __post_init__(self):
        if self.kind not in ("bouchaud", "metropolis", "heat_bath"):
            raise ValueError(f"unknown dynamics {self.kind!r}")
        if self.kind == "bouchaud":
            if self.a is None:
                object.__setattr__(self, "a", 1.0)
            if not 0.0 <= self.a <= 1.0:
                raise ValueError(f"a must lie in [0,1], got {self.a}")
        elif self.a is not None:
            raise ValueError(f"{self.kind} takes no exponent a")

    @classmethod
    def bouchaud(cls, a: float) -> "DynamicsSpec":
        return cls("bouchaud", a)

    @classmethod
    def metropolis(cls) -> "DynamicsSpec":
        return cls("metropolis")

    @classmethod
    def heat_bath(cls) -> "DynamicsSpec":
        return cls("heat_bath")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a}

    @classmethod
    def from_dict(cls, obj: dict) -> "DynamicsSpec":
        return cls(obj["kind"], obj.get("a"))


def jump_rate(tau_x, tau_y, spec: DynamicsSpec):
    """Rate of the direct walk X from a site of depth tau_x to one of depth tau_y."""
    tau_x = np.asarray(tau_x, dtype=float)
    tau_y = np.asarray(tau_y, dtype=float)
    if spec.kind == "bouchaud":
        return tau_y**spec.a / tau_x ** (1.0 - spec.a)
    if spec.kind == "metropolis":
        return np.minimum(1.0, tau_y / tau_x)
    return 1.0 / (1.0 + tau_x / tau_y)


def edge_conductance(tau_x, tau_y, spec: DynamicsSpec):
    """Symmetric conductance tau_x * jump_rate(tau_x, tau_y); rate of X-hat."""
    tau_x = np.asarray(tau_x, dtype=float)
    tau_y = np.asarray(tau_y, dtype=float)
    if spec.kind == "bouchaud":
        return (tau_x * tau_y) ** spec.a
    if spec.kind == "metropolis":
        return np.minimum(tau_x, tau_y)
    return tau_x * tau_y / (tau_x + tau_y)


@dataclass
class PathSample:
    """Embedded jump chain with jump times; cadlag position function.

    ``times[0] == 0`` and ``sites[0]`` is the start; ``taus`` are the depths
    at the occupied sites.  ``horizon`` is the total simulated time (>= the
    last jump time).
    """

    times: np.ndarray
    sites: np.ndarray
    taus: np.ndarray
    horizon: float

    @property
    def d(self) -> int:
        return self.sites.shape[1]

    @property
    def n_jumps(self) -> int:
        return self.times.size - 1

    def position_at(self, t: float) -> np.ndarray:
        if t < 0 or t > self.horizon:
            raise ValueError("time outside the simulated horizon")
        idx = int(np.searchsorted(self.times, t, side="right") - 1)
        return self.sites[idx]

    def segments(self):
        """(site, t_start, t_end) occupation segments covering [0, horizon]."""
        ends = np.append(self.times[1:], self.horizon)
        for i in range(self.times.size):
            yield self.sites[i], float(self.times[i]), float(ends[i])


@dataclass
class ClockPath:
    """Piecewise-linear clock A(t) = integral of tau along the walk.

    ``breakpoints`` are the jump times of X-hat (starting at 0) and
    ``slopes[i]`` is the depth on [breakpoints[i], breakpoints[i+1]).
    Slopes are >= 1, so A is strictly increasing and invertible.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray
    horizon: float

    def __post_init__(self):
        ends = np.append(self.breakpoints[1:], self.horizon)
        self._values = np.concatenate(
            [[0.0], np.cumsum(self.slopes * (ends - self.breakpoints))])

    @property
    def total(self) -> float:
        """A(horizon)."""
        return float(self._values[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon * (1 + 1e-12)):
            raise ValueError("time outside the simulated horizon")
        idx = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1,
                      0, self.slopes.size - 1)
        return self._values[idx] + self.slopes[idx] * (t - self.breakpoints[idx])

    def inverse(self, s):
        """Exact piecewise-linear inverse: t with A(t) = s."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s > self.total * (1 + 1e-12)):
            raise ValueError("clock value outside the simulated range")
        idx = np.clip(np.searchsorted(self._values, s, side="right") - 1,
                      0, self.slopes.size - 1)
        return self.breakpoints[idx] + (s - self._values[idx]) / self.slopes[idx]


def clock_inverse_at(clock: ClockPath, t: float) -> float:
    return float(clock.inverse(t))


def rescaled_clock(clock: ClockPath, epsilon: float, alpha: float):
    """H(t) = epsilon^(1/alpha) * A(t / epsilon); valid while t/eps <= horizon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    scale = epsilon ** (1.0 / alpha)

    def h(t):
        return scale * clock(np.asarray(t, dtype=float) / epsilon)

    return h


def derive_seeds(master_seed: int, replica: int) -> dict:
    """Independent (hold, move, env) seed triple for one replica."""
    base = mix64((master_seed & MASK64) ^ mix64(replica & MASK64))
    return {
        "hold": mix64(base ^ (1 * GOLDEN64 & MASK64)),
        "move": mix64(base ^ (2 * GOLDEN64 & MASK64)),
        "env": mix64(base ^ (3 * GOLDEN64 & MASK64)),
    }


def _result_to_paths(res: dict, horizon_hint: float | None = None):
    times = res["path_times"]
    sites = res["path_sites"]
    taus = res["path_taus"]
    horizon = res["time"] if res["stopped_by"] == "time" else float(times[-1])
    path = PathSample(times=times, sites=sites, taus=taus, horizon=horizon)
    clock = ClockPath(breakpoints=times, slopes=taus, horizon=horizon)
    return path, clock


def simulate_time_changed_walk(
    env: Environment,
    spec: DynamicsSpec,
    *,
    max_steps: int | None = None,
    max_time: float | None = None,
    hold_seed: int,
    move_seed: int,
    backend=None,
) -> tuple[PathSample, ClockPath]:
    """Simulate X-hat with full path recording; returns (path, clock)."""
    res = kernels.run_walk(
        env, spec, max_steps=max_steps, max_time=max_time,
        hold_seed=hold_seed, move_seed=move_seed,
        time_change=True, record_path=True, backend=backend)
    if res["steps"] == 0 and res["stopped_by"] == "steps":
        raise RuntimeError("stop bound produced an empty path")
    return _result_to_paths(res)


def simulate_direct_walk(
    env: Environment,
    spec: DynamicsSpec,
    *,
    max_steps: int | None = None,
    max_time: float | None = None,
    hold_seed: int,
    move_seed: int,
    backend=None,
) -> PathSample:
    """Simulate X directly (holding rates divided by tau at the site)."""
    res = kernels.run_walk(
        env, spec, max_steps=max_steps, max_time=max_time,
        hold_seed=hold_seed, move_seed=move_seed,
        time_change=False, record_path=True, backend=backend)
    if res["steps"] == 0 and res["stopped_by"] == "steps":
        raise RuntimeError("stop bound produced an empty path")
    path, _ = _result_to_paths(res)
    return path
