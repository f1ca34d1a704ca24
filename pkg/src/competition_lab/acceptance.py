"""The acceptance suite A1-A12.

:class:`Suite` builds the shared ensembles lazily, so each criterion can be
run alone and criteria that share an ensemble pay for it once.  ``scale``
multiplies every replica count (floored at small minimums) for quick runs;
``scale=1`` is the reference configuration.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import hydro
from .experiments import profile_from_records
from .model import Params
from .rng import RngStream
from .stats import (
    ExperimentSpec,
    ensemble_variances,
    exponent_regression,
    ks_distance,
    ks_two_sample,
    normality_check,
    profile_l1,
    run_replicas,
)

LADDER = (125.0, 250.0, 500.0, 1000.0, 2000.0)
MATCHED = ((0.3, 0.7), (0.5, 0.5), (0.8, 0.2))

CRITERIA = {
    "A1": "inclination, deterministic phase",
    "A2": "inclination, random phase",
    "A3": "second-class speed",
    "A4": "coupling identity",
    "A5": "geodesic-cluster equivalence and growth oracle",
    "A6": "fluctuation exponents",
    "A7": "Gaussian shock fluctuations",
    "A8": "hydrodynamic profile",
    "A9": "shape theorem",
    "A10": "psi-limit and J-integral",
    "A11": "stationary duality",
    "A12": "law-layer invariants",
}


@dataclass
class CriterionResult:
    id: str
    title: str
    passed: bool
    metrics: dict
    seconds: float = 0.0

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"{self.id} {'PASS' if self.passed else 'FAIL'} [{self.title}] {shown} ({self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


@dataclass
class Suite:
    seed: int = 20240601
    scale: float = 1.0
    workers: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # -- plumbing ------------------------------------------------------------
    def n(self, full: int, minimum: int = 20) -> int:
        return max(minimum, int(round(full * self.scale))) if self.scale != 1.0 else full

    def master(self, key: int) -> int:
        return RngStream(self.seed).child(1000 + key).seed

    def ensemble(self, name: str, spec_fn):
        if name not in self._cache:
            self._cache[name] = run_replicas(spec_fn(), workers=self.workers)
        return self._cache[name]

    def shock(self):
        return self.ensemble("shock", lambda: ExperimentSpec(
            Params(0.3, 0.7), "fluctuation", 2000.0, self.n(2000, 100), self.master(1), LADDER))

    def rarefaction(self):
        return self.ensemble("rarefaction", lambda: ExperimentSpec(
            Params(0.8, 0.2), "speed", 2000.0, self.n(1000), self.master(2), (2000.0,)))

    def stationary(self):
        return self.ensemble("stationary", lambda: ExperimentSpec(
            Params(0.5, 0.5), "fluctuation", 2000.0, self.n(1000), self.master(3), LADDER))

    def run(self, cid: str) -> CriterionResult:
        start = time.perf_counter()
        passed, metrics = getattr(self, "_" + cid.lower())()
        return CriterionResult(cid, CRITERIA[cid], bool(passed), metrics, time.perf_counter() - start)

    def run_all(self, ids=None):
        return [self.run(c) for c in (ids or CRITERIA)]

    # -- criteria ------------------------------------------------------------
    def _a1(self):
        recs = run_replicas(ExperimentSpec(Params(0.2, 0.8), "inclination", 2000, self.n(500), self.master(11)),
                            workers=self.workers)
        mean = float(np.mean([r["tan_alpha"] for r in recs]))
        return abs(mean - 1.0) <= 0.1, {"mean_tan_alpha": mean, "target": 1.0, "tol": 0.1, "replicas": len(recs)}

    def _a2(self):
        p = Params(0.8, 0.2)
        recs = run_replicas(ExperimentSpec(p, "inclination", 2000, self.n(1000), self.master(12)),
                            workers=self.workers)
        d = ks_distance([r["tan_alpha"] for r in recs], hydro.inclination_law(p))
        return d <= 0.06, {"ks": d, "bound": 0.06, "replicas": len(recs)}

    def _a3(self):
        shock = self.shock()[: self.n(500)]
        mean = float(np.mean([r["X"][-1] / 2000.0 for r in shock]))
        rare = self.rarefaction()
        d = ks_distance([r["X"][-1] / 2000.0 for r in rare], hydro.second_class_speed_law(Params(0.8, 0.2)))
        ok = abs(mean) <= 0.02 and d <= 0.05
        return ok, {"shock_mean_speed": mean, "tol": 0.02, "rarefaction_ks": d, "bound": 0.05,
                    "replicas": f"{len(shock)}+{len(rare)}"}

    def _a4(self):
        total = {"identity_violations": 0, "bad_events": 0, "phi_mismatches": 0, "not_increasing": 0}
        runs = events = 0
        for k, (lam, rho) in enumerate(MATCHED):
            recs = run_replicas(ExperimentSpec(Params(lam, rho), "coupling", 500.0, self.n(100, 10),
                                               self.master(40 + k)), workers=self.workers)
            for r in recs:
                total["identity_violations"] += r["identity_violations"]
                total["bad_events"] += r["bad_events"]
                total["phi_mismatches"] += r["phi_mismatches"]
                total["not_increasing"] += 0 if r["strictly_increasing"] else 1
                events += r["events"]
            runs += len(recs)
        return sum(total.values()) == 0, {**total, "runs": runs, "events": events}

    def _a5(self):
        mism = cells = 0
        counts = _split(self.n(20, 3), 3)
        for k, (lam, rho) in enumerate(MATCHED):
            for r in run_replicas(ExperimentSpec(Params(lam, rho), "clusters", 300, counts[k], self.master(50 + k)),
                                  workers=self.workers):
                mism += r["mismatches"]
                cells += r["interior"]
        o_mism = o_cells = 0
        counts = _split(self.n(100, 3), 3)
        for k, (lam, rho) in enumerate(MATCHED):
            for r in run_replicas(ExperimentSpec(Params(lam, rho), "oracle", 50, counts[k], self.master(55 + k)),
                                  workers=self.workers):
                o_mism += r["mismatches"]
                o_cells += r["cells"]
        return mism == 0 and o_mism == 0, {"label_mismatches": mism, "sites": cells,
                                           "oracle_mismatches": o_mism, "oracle_sites": o_cells}

    def _a6(self):
        stat = np.array([r["X"] for r in self.stationary()], dtype=float)
        shock = np.array([r["X"] for r in self.shock()[: self.n(1000)]], dtype=float)
        fit_s = exponent_regression(LADDER, ensemble_variances(stat))
        fit_k = exponent_regression(LADDER, ensemble_variances(shock))
        ok = 1.15 <= fit_s.slope <= 1.55 and 0.85 <= fit_k.slope <= 1.15
        return ok, {"stationary_slope": fit_s.slope, "stationary_band": "[1.15,1.55]",
                    "shock_slope": fit_k.slope, "shock_band": "[0.85,1.15]"}

    def _a7(self):
        x = np.array([r["X"][-1] for r in self.shock()], dtype=float)
        z = (x - x.mean()) / x.std()
        res = normality_check(z)
        return res.passed, {"skew": res.skewness, "excess_kurtosis": res.excess_kurtosis,
                            "bounds": "0.15/0.3", "replicas": x.size}

    def _a8(self):
        out = {}
        l1 = {}
        for key, (lam, rho), exclude, m in (("rarefaction", (0.8, 0.2), None, 81),
                                            ("shock", (0.3, 0.7), (0.0, 0.05), 82)):
            p = Params(lam, rho)
            recs = run_replicas(ExperimentSpec(p, "profile", 2000.0, self.n(200, 10), self.master(m),
                                               options={"bin_width": 0.02}), workers=self.workers)
            prof = profile_from_records(recs, 2000.0, 0.02)
            l1[key] = profile_l1(prof, lambda r, p=p: hydro.burgers_u(p, r, 1.0), (-1.0, 1.0),
                                 exclude=exclude, require_full=True)
            out[f"{key}_l1"] = l1[key]
        out["bound"] = 0.02
        return all(v <= 0.02 for v in l1.values()), out

    def _a9(self):
        p = Params(1.0, 0.0)
        rec = run_replicas(ExperimentSpec(p, "shape", 2000.0, 1, self.master(9)), workers=1)[0]
        r = np.linspace(-1.0, 1.0, 2001)
        pts = hydro.limit_shape(p).point(r)
        rost = float(np.max(np.abs(np.sqrt(pts[:, 0]) + np.sqrt(pts[:, 1]) - 1.0)))
        ok = rec["deviation"] <= 0.03 and rost <= 1e-12
        return ok, {"sup_distance": rec["deviation"], "bound": 0.03, "rost_error": rost}

    def _a10(self):
        recs = self.rarefaction()[: self.n(500)]
        x = np.array([r["X"][-1] for r in recs]) / 2000.0
        j = np.array([r["J"][-1] for r in recs]) / 2000.0
        dev = float(np.mean(np.abs(j - (1.0 - x) ** 2 / 4.0)))
        return dev <= 0.03, {"mean_abs_dev": dev, "bound": 0.03, "replicas": len(recs)}

    def _a11(self):
        recs = run_replicas(ExperimentSpec(Params(0.5, 0.5), "duality", 200, self.n(800), self.master(111),
                                           options={"corner": 1500}), workers=self.workers)
        stat, pval = ks_two_sample([r["forward_up"] for r in recs], [r["backward_down"] for r in recs])
        return pval >= 0.01, {"ks": stat, "p_value": pval, "min_p": 0.01, "replicas": len(recs)}

    def _a12(self):
        m = law_invariants()
        ok = all(v <= 1e-8 for v in m.values())
        return ok, m


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if k < extra else 0) for k in range(parts)]


def law_invariants() -> dict:
    """Largest violation of each closed-form identity over a parameter grid."""
    out = {}
    grid = np.linspace(0.05, 0.95, 10)
    # branches at lam == rho
    err = 0.0
    for a in grid:
        p = Params(a, a)
        point = a * a / ((1 - a) ** 2)
        err = max(err, abs(float(hydro.slope_map(1 - 2 * a)) - point),
                  abs((1 - 2 * a) - hydro.shock_speed(p)),
                  float(np.max(np.abs(hydro.psi_point(1 - 2 * a) - hydro.psi_limit_law(p).point))),
                  abs(hydro.inclination_law(p).value - point))
    out["branch_continuity"] = err
    # Rankine-Hugoniot
    gen = np.random.default_rng(12)
    err = 0.0
    for _ in range(20):
        lam, rho = np.sort(gen.uniform(0.01, 0.99, 2))
        p = Params(lam, rho)
        err = max(err, abs((hydro.flux(rho) - hydro.flux(lam)) / (rho - lam) - hydro.shock_speed(p)))
    out["rankine_hugoniot"] = err
    # fan endpoints
    err = 0.0
    for lam, rho in ((0.8, 0.2), (1.0, 0.0), (0.6, 0.3), (0.9, 0.85)):
        p = Params(lam, rho)
        lo, hi = 1 - 2 * lam, 1 - 2 * rho
        for r, v in ((lo, lam), (hi, rho)):
            for e in (-1e-12, 0.0, 1e-12):
                err = max(err, abs(hydro.burgers_u(p, r + e, 1.0) - v))
    out["fan_endpoints"] = err
    # mass balance
    err = 0.0
    for lam, rho in ((0.8, 0.2), (0.3, 0.7), (0.5, 0.5), (1.0, 0.0), (0.6, 0.1)):
        for t in (0.5, 1.0, 3.0):
            err = max(err, abs(hydro.mass_defect(Params(lam, rho), t, 4.0 * t)))
    out["mass_conservation"] = err
    # psi-limit ratio against the inclination law
    u = np.linspace(-0.99, 0.99, 100)
    pts = hydro.psi_point(u)
    out["psi_ratio"] = float(np.max(np.abs(pts[:, 1] / pts[:, 0] - hydro.slope_map(u)) / hydro.slope_map(u)))
    # tangency of the curved shape
    shape = hydro.limit_shape(Params(0.8, 0.2))
    r = np.linspace(-0.55, 0.55, 23)
    h = 1e-6
    d = (shape.point(r + h) - shape.point(r - h)) / (2 * h)
    uu = shape.u(r)
    out["tangency"] = float(np.max(np.abs(d - np.stack([1 - uu, -uu], axis=-1))))
    return out


def run_suite(seed: int = 20240601, scale: float = 1.0, workers: int | None = None, ids=None):
    return Suite(seed=seed, scale=scale, workers=workers).run_all(ids)


__all__ = ["CRITERIA", "CriterionResult", "Suite", "law_invariants", "run_suite", "LADDER"]
