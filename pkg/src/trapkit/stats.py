"""Statistical verification primitives.

Goodness-of-fit, dispersion, tail-index and independence tests, empirical
Laplace exponents, an M1 distance for nondecreasing cadlag paths, and a
mergeable moment accumulator.  All tests return small result objects with
a ``passed`` flag so experiment drivers can emit JSON verdicts directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats as spstats

KS_C05 = 1.36  # asymptotic 5% critical constant c: threshold c/sqrt(n)


@dataclass
class TestResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "statistic": self.statistic,
               "threshold": self.threshold, "pass": bool(self.passed)}
        out.update(self.extra)
        return out


def ks_statistic(samples, cdf, level: float = 0.05) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a callable CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - f), np.max(f - (i - 1) / n))
    # asymptotic Kolmogorov critical value at the requested level
    c = KS_C05 if level == 0.05 else special.kolmogi(level)
    threshold = c / np.sqrt(n)
    pvalue = float(special.kolmogorov(np.sqrt(n) * d))
    return TestResult("ks", float(d), float(threshold), d <= threshold,
                      {"n": int(n), "p_value": pvalue, "level": level})


def dispersion_test(counts, level: float = 0.05) -> TestResult:
    """Variance/mean ratio of counts with a chi-square acceptance band."""
    c = np.asarray(counts, dtype=float)
    n = c.size
    if n < 30:
        raise ValueError("need at least 30 counts")
    m = c.mean()
    if m == 0:
        raise ValueError("zero mean count")
    index = c.var(ddof=1) / m
    # (n-1)*index ~ chi2(n-1) under the Poisson null
    lo = spstats.chi2.ppf(level / 2, n - 1) / (n - 1)
    hi = spstats.chi2.ppf(1 - level / 2, n - 1) / (n - 1)
    return TestResult("dispersion", float(index), float(hi),
                      lo <= index <= hi, {"band": (float(lo), float(hi)), "n": int(n)})


def hill_alpha(samples, k: int) -> dict:
    """Hill tail-index estimate from the top k order statistics.

    Returns alpha_hat with the usual 1.96/sqrt(k) relative CI, plus a crude
    heavy-tail flag: on light tails the estimate drifts upward with k.
    """
    x = np.asarray(samples, dtype=float)
    if np.any(x <= 0):
        raise ValueError("samples must be positive")
    n = x.size
    if not (10 <= k < n):
        raise ValueError("need 10 <= k < n")
    xs = np.sort(x)[::-1]
    excess = np.log(xs[:k]) - np.log(xs[k])
    mean_excess = excess.mean()
    alpha_hat = 1.0 / mean_excess
    half = 1.96 / np.sqrt(k)
    ci = (alpha_hat * (1 - half), alpha_hat * (1 + half))
    # drift diagnostic: compare against the estimate at k/4
    k4 = max(10, k // 4)
    alpha_small_k = 1.0 / (np.log(xs[:k4]) - np.log(xs[k4])).mean()
    drift = alpha_hat / alpha_small_k - 1.0
    return {"alpha": float(alpha_hat), "ci": (float(ci[0]), float(ci[1])),
            "k": int(k), "drift": float(drift),
            "heavy_tail_suspect": bool(abs(drift) < 0.5)}


def empirical_laplace_exponent(values, t: float, lam: float,
                               n_boot: int = 400, rng=None) -> dict:
    """psi_hat = -ln(mean exp(-lam * value)) / t with a bootstrap SE."""
    v = np.asarray(values, dtype=float)
    if t <= 0:
        raise ValueError("t must be positive")
    if v.size == 0:
        raise ValueError("empty sample")
    w = np.exp(-lam * v)
    m = w.mean()
    if m <= 0:
        raise ValueError("degenerate zero mean of exp(-lam*value)")
    psi = -np.log(m) / t
    se = 0.0
    if n_boot > 0 and v.size > 1:
        rng = np.random.default_rng(rng)
        idx = rng.integers(0, v.size, size=(n_boot, v.size))
        boots = -np.log(np.maximum(w[idx].mean(axis=1), 1e-300)) / t
        se = float(boots.std(ddof=1))
    return {"psi": float(psi), "se": se, "n": int(v.size), "lam": lam, "t": t}


# ---------------------------------------------------------------------------
# M1 distance for nondecreasing cadlag paths
# ---------------------------------------------------------------------------

class MonotonePath:
    """Nondecreasing cadlag path on [0, t] given by breakpoints.

    ``times``/``values`` list the right-continuous values at the breakpoints;
    between breakpoints the path is linear if ``piecewise_linear`` else
    constant (a step function).  values[0] is the value at times[0].
    """

    def __init__(self, times, values, piecewise_linear: bool = False):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times/values must be matching 1-d arrays")
        if np.any(np.diff(self.times) < 0) or np.any(np.diff(self.values) < -1e-12):
            raise ValueError("path must be nondecreasing in time and value")
        self.piecewise_linear = piecewise_linear

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.piecewise_linear:
            return np.interp(t, self.times, self.values)
        idx = np.searchsorted(self.times, t, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        out = self.values[idx]
        return np.where(t < self.times[0], self.values[0], out)

    def completed_graph(self, t_end: float) -> np.ndarray:
        """Vertices (time, value) of the completed graph on [0, t_end]."""
        pts = [(0.0, float(self.values[0]) if self.times[0] <= 0 else 0.0)]
        prev_v = pts[0][1]
        for ti, vi in zip(self.times, self.values):
            if ti < 0 or ti > t_end:
                continue
            if not self.piecewise_linear and vi != prev_v:
                pts.append((float(ti), prev_v))   # vertical jump segment
            pts.append((float(ti), float(vi)))
            prev_v = float(vi)
        end_v = float(self(t_end))
        if pts[-1] != (float(t_end), end_v):
            pts.append((float(t_end), end_v))
        out = np.array(pts, dtype=float)
        # drop exact duplicates
        keep = np.ones(len(out), dtype=bool)
        keep[1:] = np.any(np.diff(out, axis=0) != 0.0, axis=1)
        return out[keep]


def step_path(jump_times, jump_sizes) -> MonotonePath:
    """Cadlag step function sum_i size_i * 1{t >= time_i}, starting at 0."""
    jt = np.asarray(jump_times, dtype=float)
    js = np.asarray(jump_sizes, dtype=float)
    order = np.argsort(jt, kind="stable")
    times = np.concatenate([[0.0], jt[order]])
    values = np.concatenate([[0.0], np.cumsum(js[order])])
    return MonotonePath(times, values, piecewise_linear=False)


def _resample_polyline(pts: np.ndarray, m: int) -> np.ndarray:
    """m points spread along a polyline by combined |dt|+|dx| arc length."""
    seg = np.abs(np.diff(pts, axis=0)).sum(axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0.0:
        return np.repeat(pts[:1], m, axis=0)
    grid = np.linspace(0.0, total, m)
    ts = np.interp(grid, s, pts[:, 0])
    xs = np.interp(grid, s, pts[:, 1])
    return np.column_stack([ts, xs])


def sup_distance(f: MonotonePath, g: MonotonePath, t_end: float) -> float:
    """sup_{[0,t]} |f - g| evaluated on merged breakpoints and both jump sides."""
    ts = np.unique(np.concatenate([f.times, g.times, [0.0, t_end]]))
    ts = ts[(ts >= 0.0) & (ts <= t_end)]
    probes = np.unique(np.concatenate([ts, np.clip(ts - 1e-12, 0.0, t_end)]))
    return float(np.max(np.abs(f(probes) - g(probes))))


def m1_distance(f: MonotonePath, g: MonotonePath, t_end: float,
                refinement: int = 200) -> float:
    """Approximate Skorokhod M1 distance between nondecreasing cadlag paths.

    Both completed graphs are resampled to ``refinement`` points and aligned
    by a monotone dynamic program minimizing the sup of the pointwise max
    metric on (time, value).  The result is an upper bound on the true M1
    distance within one grid modulus, and is clamped by the sup distance
    (which always dominates M1).
    """
    if abs(float(f(0.0))) > 1e-12 or abs(float(g(0.0))) > 1e-12:
        raise ValueError("paths must start at 0")
    p = _resample_polyline(f.completed_graph(t_end), refinement)
    q = _resample_polyline(g.completed_graph(t_end), refinement)
    # pairwise L-inf cost between curve points
    cost = np.maximum(np.abs(p[:, None, 0] - q[None, :, 0]),
                      np.abs(p[:, None, 1] - q[None, :, 1]))
    m = cost.shape[0]
    dp = np.empty_like(cost)
    dp[0, :] = np.maximum.accumulate(cost[0, :])
    for i in range(1, m):
        row = dp[i - 1]
        best = np.minimum(row, np.concatenate([[np.inf], row[:-1]]))
        # dp[i, j] = max(cost[i, j], min(dp[i-1, j], dp[i-1, j-1], dp[i, j-1]))
        out = dp[i]
        prev = np.inf
        ci = cost[i]
        for j in range(m):
            prev = max(ci[j], min(best[j], prev))
            out[j] = prev
    return float(min(dp[-1, -1], sup_distance(f, g, t_end)))


def independence_statistic(x, y, n_perm: int = 200, rng=None) -> dict:
    """Distance correlation with a permutation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 100:
        raise ValueError("need at least 100 pairs")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("constant marginals")
    ax = np.abs(x[:, None] - x[None, :])
    ay = np.abs(y[:, None] - y[None, :])

    def center(a):
        return a - a.mean(axis=0)[None, :] - a.mean(axis=1)[:, None] + a.mean()

    A = center(ax)

    def dcor_with(ayy):
        B = center(ayy)
        dcov2 = (A * B).mean()
        dvarx = (A * A).mean()
        dvary = (B * B).mean()
        if dvarx <= 0 or dvary <= 0:
            return 0.0
        return float(np.sqrt(max(dcov2, 0.0) / np.sqrt(dvarx * dvary)))

    observed = dcor_with(ay)
    rng = np.random.default_rng(rng)
    null = np.empty(n_perm)
    for b in range(n_perm):
        perm = rng.permutation(n)
        null[b] = dcor_with(ay[np.ix_(perm, perm)])
    pvalue = float((1 + np.sum(null >= observed)) / (1 + n_perm))
    return {"dcor": observed, "p_value": pvalue, "n": int(n), "n_perm": n_perm}


@dataclass
class EmpiricalSummary:
    """Mergeable moment accumulator; merging equals summarizing the union."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    minimum: float = np.inf
    maximum: float = -np.inf

    def add(self, values) -> "EmpiricalSummary":
        v = np.asarray(values, dtype=float).ravel()
        if v.size:
            self.count += v.size
            self.total += float(v.sum())
            self.total_sq += float((v * v).sum())
            self.minimum = min(self.minimum, float(v.min()))
            self.maximum = max(self.maximum, float(v.max()))
        return self

    def merge(self, other: "EmpiricalSummary") -> "EmpiricalSummary":
        return EmpiricalSummary(
            count=self.count + other.count,
            total=self.total + other.total,
            total_sq=self.total_sq + other.total_sq,
            minimum=min(self.minimum, other.minimum),
            maximum=max(self.maximum, other.maximum),
        )

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return (self.total_sq - self.total * self.total / self.count) / (self.count - 1)

    @property
    def se(self) -> float:
        return float(np.sqrt(max(self.variance, 0.0) / self.count))


def bootstrap_se(values, statistic=np.mean, n_boot: int = 400, rng=None) -> float:
    """Percentile-free bootstrap standard error of a statistic of the sample."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    rng = np.random.default_rng(rng)
    reps = np.empty(n_boot)
    for b in range(n_boot):
        reps[b] = statistic(v[rng.integers(0, v.size, v.size)])
    return float(reps.std(ddof=1))
