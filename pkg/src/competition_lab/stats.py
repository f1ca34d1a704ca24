"""Replica orchestration and the statistics that turn ensembles into verdicts."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st

from .errors import CompetitionLabError, InvalidParams, ReplicaError
from .model import Params
from .rng import RngStream, replica_stream

KINDS = ("inclination", "speed", "coupling", "fluctuation", "profile", "duality", "clusters", "oracle", "shape")


@dataclass(frozen=True)
class ExperimentSpec:
    """One ensemble: ``replicas`` independent runs of ``kind`` on streams
    ``replica_stream(seed, i)``.

    ``horizon`` is a time for exclusion-based kinds and a step count for
    path-based ones; ``options`` carries kind-specific knobs.
    """

    params: Params
    kind: str
    horizon: float
    replicas: int
    seed: int
    observe_at: tuple[float, ...] = ()
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise InvalidParams("replicas must be >= 1")
        if not self.horizon > 0:
            raise InvalidParams("horizon must be positive")
        if any(not t > 0 or t > self.horizon for t in self.observe_at):
            raise InvalidParams("observation times must lie in (0, horizon]")
        object.__setattr__(self, "observe_at", tuple(float(t) for t in self.observe_at))


def default_workers() -> int:
    env = os.environ.get("COMPETITION_LAB_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidParams(f"COMPETITION_LAB_WORKERS must be an integer, got {env!r}") from None
        if n < 1:
            raise InvalidParams("COMPETITION_LAB_WORKERS must be >= 1")
        return n
    return os.cpu_count() or 1


def _call(job):
    func, master, index, args = job
    stream = replica_stream(master, index)
    try:
        rec = func(stream, *args)
    except CompetitionLabError as exc:
        raise ReplicaError(index, stream.seed, exc) from exc
    return {"replica": index, "seed": stream.seed, **rec}


def run_replicas(func, replicas: int | None = None, seed: int | None = None, args: tuple = (),
                 workers: int | None = None, start: int = 0) -> list[dict]:
    """Run ``func(stream, *args)`` for replicas ``start..start + replicas - 1``.

    ``func`` may also be an :class:`ExperimentSpec`.  Records come back in
    replica order whatever the worker count, each tagged with its index and
    seed.  The first failing replica raises :class:`ReplicaError`.
    """
    if isinstance(func, ExperimentSpec):
        from .experiments import replica_job

        spec = func
        func, seed, args = replica_job(spec)
        replicas = spec.replicas if replicas is None else replicas
    if replicas is None or seed is None:
        raise ValueError("replicas and seed are required")
    jobs = [(func, seed, i, args) for i in range(start, start + replicas)]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_call, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


# -- statistics -------------------------------------------------------------

def ks_distance(sample, law) -> float:
    """``sup |F_n - F|`` for ``law`` (an object with ``cdf`` or a callable).

    Left limits at atoms come from ``law.cdf_left`` when present, so laws
    with jumps are handled exactly.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    cdf = law.cdf if hasattr(law, "cdf") else law
    F = np.asarray(cdf(x), dtype=float)
    Fl = np.asarray(law.cdf_left(x), dtype=float) if hasattr(law, "cdf_left") else F
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - F)), float(np.max(Fl - (i - 1) / n)))
    return min(max(d, 0.0), 1.0)


def ks_two_sample(a, b):
    """``(statistic, p-value)`` of the two-sample test."""
    res = _st.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    stderr: float
    n_points: int


def exponent_regression(times, variances) -> RegressionResult:
    """Least-squares slope of ``log variance`` against ``log t``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(variances, dtype=float)
    if t.shape != v.shape or t.size < 3:
        raise ValueError("need at least three (time, variance) pairs")
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("times and variances must be strictly positive")
    fit = _st.linregress(np.log(t), np.log(v))
    return RegressionResult(float(fit.slope), float(fit.intercept), float(fit.stderr), int(t.size))


@dataclass(frozen=True)
class NormalityResult:
    skewness: float
    excess_kurtosis: float
    passed: bool


def normality_check(sample, skew_bound: float = 0.15, kurtosis_bound: float = 0.3) -> NormalityResult:
    x = np.asarray(sample, dtype=float)
    if x.size < 100:
        raise ValueError("normality check needs at least 100 values")
    s = float(_st.skew(x))
    k = float(_st.kurtosis(x))
    return NormalityResult(s, k, abs(s) <= skew_bound and abs(k) <= kurtosis_bound)


def profile_l1(profile, law, r_range=(-1.0, 1.0), exclude=None, require_full: bool = False) -> float:
    """``sum |density - law(center)| * overlap`` over bins meeting ``r_range``.

    ``exclude=(c, b)`` drops bins that meet the open band ``|r - c| < b``.
    Missing (NaN) bins are skipped unless ``require_full`` is set.
    """
    lo, hi = r_range
    c = profile.centers
    w = profile.bin_width
    overlap = np.clip(c + w / 2, lo, hi) - np.clip(c - w / 2, lo, hi)
    use = overlap > 0
    if exclude is not None:
        c0, b = exclude
        use &= ~(np.abs(c - c0) < b + w / 2 - 1e-12)
    d = profile.density
    missing = use & np.isnan(d)
    if require_full and np.any(missing):
        raise ValueError(f"{int(missing.sum())} bins in range have no uncontaminated sites")
    use &= ~np.isnan(d)
    if not np.any(use):
        raise ValueError("empirical profile and law do not overlap")
    err = np.abs(d[use] - np.asarray(law(c[use]), dtype=float))
    return float(np.sum(err * overlap[use]))


def ensemble_variances(samples: np.ndarray) -> np.ndarray:
    """Variance about the ensemble mean for each column (time)."""
    return np.var(np.asarray(samples, dtype=float), axis=0, ddof=1)


__all__ = [
    "ExperimentSpec",
    "RegressionResult",
    "NormalityResult",
    "RngStream",
    "run_replicas",
    "ks_distance",
    "ks_two_sample",
    "exponent_regression",
    "normality_check",
    "profile_l1",
    "ensemble_variances",
    "default_workers",
]
