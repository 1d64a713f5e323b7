"""Deterministic heavy-tailed random environment on Z^d.

Depths are generated lazily from a counter-based hash of (seed, site), so
two Environment objects with the same parameters agree on every site no
matter how, or in which order, they are evaluated.  The default depth law
is the exact Pareto tail P[tau >= y] = y**(-alpha) for y >= 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15
_ENV_DOMAIN = 0x5851F42D4C957F2D

# 2**-53; uniforms are ((h >> 11) + 1) * 2**-53 in (0, 1], exact in binary64
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 finalizer on python ints (mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer on uint64 arrays."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def site_hash(seed: int, coords) -> int:
    """64-bit hash of one lattice site, order-sensitive in the coordinates."""
    h = mix64(seed ^ _ENV_DOMAIN)
    for c in coords:
        h = mix64(h ^ (int(c) & MASK64))
    return h


def site_hash_array(seed: int, coords: np.ndarray) -> np.ndarray:
    """Vectorized site_hash over an (n, d) int array of sites."""
    coords = np.asarray(coords, dtype=np.int64)
    h0 = mix64(seed ^ _ENV_DOMAIN)
    h = np.full(coords.shape[0], h0, dtype=np.uint64)
    for j in range(coords.shape[1]):
        h = mix64_array(h ^ coords[:, j].view(np.uint64))
    return h


def uniform_from_bits(h):
    """Map 64-bit hash words to uniforms in (0, 1]."""
    if isinstance(h, np.ndarray):
        return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * _INV53
    return float((h >> 11) + 1) * _INV53


class ExactParetoTail:
    """Inverse CDF of the exact Pareto law P[tau >= y] = y**(-alpha), y >= 1."""

    def __init__(self, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {alpha}")
        self.alpha = float(alpha)

    def inverse(self, u):
        """tau = u**(-1/alpha) for u in (0, 1]."""
        return np.asarray(u) ** (-1.0 / self.alpha) if isinstance(u, np.ndarray) else u ** (-1.0 / self.alpha)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y < 1.0, 0.0, 1.0 - y ** (-self.alpha))

    def __eq__(self, other):
        return isinstance(other, ExactParetoTail) and other.alpha == self.alpha


class InverseCdfTable:
    """User-supplied depth law given as a tabulated inverse CDF.

    The table maps uniforms u in (0,1] to depths; interpolation is linear
    in u.  Depths must be >= 1 so that the unit lower bound on trap depths
    is preserved.
    """

    def __init__(self, us, taus):
        us = np.asarray(us, dtype=float)
        taus = np.asarray(taus, dtype=float)
        if us.ndim != 1 or us.shape != taus.shape or us.size < 2:
            raise ValueError("need matching 1-d tables with at least 2 entries")
        if not (np.all(np.diff(us) > 0) and us[0] >= 0.0 and us[-1] <= 1.0):
            raise ValueError("u grid must be strictly increasing inside [0,1]")
        if np.any(taus < 1.0):
            raise ValueError("depth law must produce values >= 1")
        self.us = us
        self.taus = taus

    def inverse(self, u):
        return np.interp(u, self.us, self.taus)


@dataclass(frozen=True)
class EnvParams:
    """Parameters of the i.i.d. depth field: tail exponent, dimension, seed."""

    alpha: float
    d: int
    seed: int
    law: object = None  # defaults to ExactParetoTail(alpha)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.law is None:
            object.__setattr__(self, "law", ExactParetoTail(self.alpha))

    def to_json(self) -> str:
        if not isinstance(self.law, ExactParetoTail):
            raise ValueError("only the exact Pareto law is JSON-serializable")
        return json.dumps(
            {"alpha": self.alpha, "d": self.d, "seed": self.seed, "law": "exact_pareto"},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, s: str) -> "EnvParams":
        obj = json.loads(s)
        if obj.get("law", "exact_pareto") != "exact_pareto":
            raise ValueError(f"unknown law tag {obj.get('law')!r}")
        return cls(alpha=obj["alpha"], d=obj["d"], seed=obj["seed"])


@dataclass(frozen=True)
class EnvWindow:
    """Finite box of depths around a center, optionally masked at the center.

    ``values`` has shape (2*radius+1,)*d; index (radius,...,radius) is the
    center.  A masked center is NaN and stands for "environment without the
    value at the origin".
    """

    center: tuple
    radius: int
    values: np.ndarray
    mask_center: bool = False

    @property
    def d(self) -> int:
        return self.values.ndim

    def value_at(self, offset) -> float:
        idx = tuple(int(o) + self.radius for o in offset)
        return float(self.values[idx])

    def entries(self):
        """(offset, depth) pairs over the box, masked center omitted."""
        r = self.radius
        for idx in np.ndindex(self.values.shape):
            off = tuple(i - r for i in idx)
            if self.mask_center and all(o == 0 for o in off):
                continue
            yield off, float(self.values[idx])


class Environment:
    """Immutable view of the depth field, possibly translated.

    ``tau_at`` is a pure function of (seed, site + origin_offset); instances
    are safe to share across threads.
    """

    def __init__(self, params: EnvParams, origin_offset=None):
        self.params = params
        if origin_offset is None:
            origin_offset = np.zeros(params.d, dtype=np.int64)
        self.origin_offset = np.asarray(origin_offset, dtype=np.int64).copy()
        if self.origin_offset.shape != (params.d,):
            raise ValueError("origin_offset must have shape (d,)")
        self.origin_offset.setflags(write=False)

    @property
    def uses_exact_pareto(self) -> bool:
        return isinstance(self.params.law, ExactParetoTail)

    def tau_at(self, x) -> float:
        """Depth at one site (>= 1 always)."""
        coords = np.asarray(x, dtype=np.int64) + self.origin_offset
        u = uniform_from_bits(site_hash(self.params.seed, coords))
        return float(self.params.law.inverse(u))

    def tau_many(self, sites: np.ndarray) -> np.ndarray:
        """Depths at an (n, d) array of sites."""
        sites = np.asarray(sites, dtype=np.int64)
        h = site_hash_array(self.params.seed, sites + self.origin_offset[None, :])
        return np.asarray(self.params.law.inverse(uniform_from_bits(h)), dtype=float)

    def translated_view(self, x) -> "Environment":
        """View theta_x of the field: tau_at(view, y) == tau_at(self, x + y)."""
        off = self.origin_offset + np.asarray(x, dtype=np.int64)
        return Environment(self.params, origin_offset=off)

    def window(self, center, radius: int, mask_center: bool = False) -> EnvWindow:
        """All depths in the box of the given radius around a center site."""
        if radius < 1:
            raise ValueError("radius must be >= 1")
        d = self.params.d
        center = np.asarray(center, dtype=np.int64)
        axes = [np.arange(-radius, radius + 1, dtype=np.int64)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        vals = self.tau_many(grid + center[None, :]).reshape((2 * radius + 1,) * d)
        if mask_center:
            vals = vals.copy()
            vals[(radius,) * d] = np.nan
        vals.setflags(write=False)
        return EnvWindow(center=tuple(int(c) for c in center), radius=radius,
                         values=vals, mask_center=mask_center)


def fresh_window_values(d: int, radius: int, alpha: float, rng: np.random.Generator,
                        mask_center: bool = False) -> EnvWindow:
    """An i.i.d. Pareto window drawn from ``rng`` (fresh environment sample)."""
    shape = (2 * radius + 1,) * d
    u = 1.0 - rng.random(size=shape)  # in (0, 1]
    vals = u ** (-1.0 / alpha)
    if mask_center:
        vals[(radius,) * d] = np.nan
    return EnvWindow(center=(0,) * d, radius=radius, values=vals, mask_center=mask_center)
