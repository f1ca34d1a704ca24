"""Command-line entry point: ``competition-lab <command> [options]``.

Every command writes its files plus ``summary.json`` into ``--out-dir``.
Exit codes: 0 success, 1 failed verification or engine failure, 2 bad
configuration.  Errors go to stderr prefixed with ``ERROR:``.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import hydro, lpp
from .acceptance import CRITERIA, LADDER, Suite
from .errors import CompetitionLabError, InvalidParams
from .experiments import competition_path, profile_from_records
from .model import Params, hashed_weights, sample_initial_interface
from .rng import RngStream, replica_stream
from .serialize import ConfigError, load_config, version_string, write_csv, write_json
from .stats import (
    ExperimentSpec,
    ensemble_variances,
    exponent_regression,
    ks_distance,
    profile_l1,
    run_replicas,
)

DEFAULTS = {
    "hydro": {"lambda": 0.5, "rho": 0.5, "grid": 201},
    "grow": {"lambda": 0.8, "rho": 0.2, "seed": 1, "box": 100},
    "compete": {"lambda": 0.2, "rho": 0.8, "seed": 1, "n_steps": 2000, "replicas": 100},
    "tasep": {"lambda": 0.8, "rho": 0.2, "seed": 1, "t_max": 2000.0, "replicas": 100},
    "profile": {"lambda": 0.8, "rho": 0.2, "seed": 1, "t_max": 2000.0, "replicas": 20, "bin_width": 0.02},
    "fluct": {"lambda": 0.5, "rho": 0.5, "seed": 1, "replicas": 200, "observe_at": list(LADDER),
              "transversal": False},
    "couple": {"lambda": 0.8, "rho": 0.2, "seed": 7, "t_max": 500.0, "replicas": 10, "box": 100},
    "verify": {"seed": 20240601, "scale": 1.0},
}


# -- commands ---------------------------------------------------------------

def _params(cfg) -> Params:
    return Params(cfg["lambda"], cfg["rho"])


def cmd_hydro(cfg, out: Path):
    p = _params(cfg)
    info = hydro.regime_summary(p)
    for key in ("theta", "regime", "shock_speed", "fan", "tan_alpha"):
        if key in info:
            v = info[key]
            print(f"{key}={'%.17g' % v if isinstance(v, float) else v}")
    for q, v in info.get("tan_alpha_quantiles", {}).items():
        print(f"tan_alpha_q{q}={'%.17g' % v}")
    shape = hydro.limit_shape(p)
    r = np.linspace(-1.0, 1.0, cfg["grid"])
    pts = shape.point(r)
    u = shape.u(r)
    write_csv(out / "shape.csv", ["r", "x", "y", "u"],
              ((float(a), float(b), float(c), float(d)) for a, b, c, d in zip(r, pts[:, 0], pts[:, 1], u)))
    return {}, info


def cmd_grow(cfg, out: Path):
    p = _params(cfg)
    stream = RngStream(cfg["seed"])
    side = cfg["box"]
    profile = sample_initial_interface(p, side, stream)
    field = lpp.compute_passage_times(profile, hashed_weights(stream), top=side)
    labels = lpp.label_clusters(field)
    inside = field.interior_mask()
    rows, cols = np.nonzero(inside)
    xs, ys = cols + field.x_lo, rows + field.y_lo
    order = np.lexsort((xs, ys))
    xs, ys, rr, cc = xs[order], ys[order], rows[order], cols[order]
    write_csv(out / "passage.csv", ["x", "y", "G"],
              zip(xs.tolist(), ys.tolist(), field.G[rr, cc].tolist()))
    write_csv(out / "labels.csv", ["x", "y", "sigma"],
              zip(xs.tolist(), ys.tolist(), labels.sigma[rr, cc].tolist()))
    path = lpp.trace_competition_interface(field)
    write_csv(out / "phi.csv", ["n", "x", "y", "G"],
              ((n, int(x), int(y), float(g)) for n, ((x, y), g) in enumerate(zip(path.steps, path.times))))
    return {}, {"interior_sites": int(inside.sum()), "phi_steps": path.n_steps,
                "cluster1_fraction": float(np.mean(labels.sigma[inside] == 1))}


def cmd_compete(cfg, out: Path, workers):
    p = _params(cfg)
    spec = ExperimentSpec(p, "inclination", cfg["n_steps"], cfg["replicas"], cfg["seed"])
    recs = run_replicas(spec, workers=workers)
    tan = [r["tan_alpha"] for r in recs]
    write_csv(out / "inclination.csv", ["replica", "seed", "I", "J", "tan_alpha"],
              ((r["replica"], r["seed"], r["I"], r["J"], r["tan_alpha"]) for r in recs))
    law = hydro.inclination_law(p)
    mean = float(np.mean(tan))
    ks = ks_distance(tan, law)
    if isinstance(law, hydro.PointMass):
        crit = {"mean_within_0.1": abs(mean - law.value) <= 0.1}
    else:
        crit = {"ks_at_most_0.06": ks <= 0.06}
    return crit, {"mean_tan_alpha": mean, "ks": ks, "replicas": len(recs)}


def cmd_tasep(cfg, out: Path, workers):
    p = _params(cfg)
    obs = cfg.get("observe_at") or [cfg["t_max"]]
    t_max = max(cfg["t_max"], max(obs))
    spec = ExperimentSpec(p, "speed", t_max, cfg["replicas"], cfg["seed"], tuple(obs))
    recs = run_replicas(spec, workers=workers)
    write_csv(out / "speed.csv", ["replica", "seed", "t", "X", "I", "J", "speed"],
              ((r["replica"], r["seed"], t, x, i, j, x / t)
               for r in recs for t, x, i, j in zip(r["t"], r["X"], r["I"], r["J"])))
    law = hydro.second_class_speed_law(p)
    t_last = recs[0]["t"][-1]
    v = [r["X"][-1] / t_last for r in recs]
    mean = float(np.mean(v))
    ks = ks_distance(v, law)
    if isinstance(law, hydro.PointMass):
        crit = {"mean_within_0.02": abs(mean - law.value) <= 0.02}
    else:
        crit = {"ks_at_most_0.05": ks <= 0.05}
    return crit, {"t": t_last, "mean_speed": mean, "ks": ks, "replicas": len(recs)}


def cmd_profile(cfg, out: Path, workers):
    p = _params(cfg)
    t = cfg["t_max"]
    w = cfg["bin_width"]
    spec = ExperimentSpec(p, "profile", t, cfg["replicas"], cfg["seed"], options={"bin_width": w})
    prof = profile_from_records(run_replicas(spec, workers=workers), t, w)
    law = lambda r: hydro.burgers_u(p, r, 1.0)  # noqa: E731
    dens = prof.density
    write_csv(out / "profile.csv", ["r", "density", "sites", "u"],
              ((float(c), float(d), int(s), float(law(c)))
               for c, d, s in zip(prof.centers, dens, prof.sites)))
    exclude = (hydro.shock_speed(p), 0.05) if p.lam < p.rho else None
    l1 = profile_l1(prof, law, (-1.0, 1.0), exclude=exclude)
    return {"l1_at_most_0.02": l1 <= 0.02}, {"l1": l1, "excluded_band": exclude, "replicas": cfg["replicas"]}


def cmd_fluct(cfg, out: Path, workers):
    p = _params(cfg)
    ladder = cfg["observe_at"]
    if len(ladder) < 3:
        raise ConfigError("fluct needs at least three observation times")
    spec = ExperimentSpec(p, "fluctuation", max(ladder), cfg["replicas"], cfg["seed"], tuple(ladder))
    recs = run_replicas(spec, workers=workers)
    X = np.array([r["X"] for r in recs], dtype=float)
    var = ensemble_variances(X)
    fit = exponent_regression(ladder, var)
    rows = [("X", t, float(m), float(v)) for t, m, v in zip(ladder, X.mean(axis=0), var)]
    results = {"regression": fit, "replicas": len(recs)}
    if cfg.get("transversal"):
        steps = [int(t) for t in ladder]
        dev = np.array([_transversal(p, cfg["seed"], i, steps) for i in range(len(recs))], dtype=float)
        tvar = ensemble_variances(dev)
        results["transversal_regression"] = exponent_regression(steps, tvar)
        rows += [("phi", float(n), float(m), float(v)) for n, m, v in zip(steps, dev.mean(axis=0), tvar)]
    write_csv(out / "fluct.csv", ["observable", "t", "mean", "variance"], rows)
    band = {"stationary": (1.15, 1.55), "shock": (0.85, 1.15)}.get(p.regime.value)
    crit = {}
    if band:
        crit["slope_in_band"] = band[0] <= fit.slope <= band[1]
        results["band"] = band
    return crit, results


def _transversal(p, seed, index, steps):
    path, _, _ = competition_path(p, replica_stream(seed ^ 0x5A5A, index), max(steps))
    return [int(path.steps[n, 0] - path.steps[n, 1]) for n in steps]


def cmd_couple(cfg, out: Path, workers):
    p = _params(cfg)
    recs = run_replicas(ExperimentSpec(p, "coupling", cfg["t_max"], cfg["replicas"], cfg["seed"]), workers=workers)
    side = cfg["box"]
    clus = run_replicas(ExperimentSpec(p, "clusters", side, cfg["replicas"], cfg["seed"] + 1), workers=workers)
    orac = run_replicas(ExperimentSpec(p, "oracle", min(side, 40), cfg["replicas"], cfg["seed"] + 2),
                        workers=workers)
    write_csv(out / "couple.csv",
              ["replica", "seed", "events", "jumps", "identity_violations", "bad_events", "phi_mismatches",
               "label_mismatches", "oracle_mismatches"],
              ((r["replica"], r["seed"], r["events"], r["jumps"], r["identity_violations"], r["bad_events"],
                r["phi_mismatches"], c["mismatches"], o["mismatches"]) for r, c, o in zip(recs, clus, orac)))
    crit = {
        "identity_X_eq_I_minus_J": all(r["identity_violations"] == 0 and r["bad_events"] == 0 for r in recs),
        "couple_follows_phi": all(r["phi_mismatches"] == 0 for r in recs),
        "event_times_increasing": all(r["strictly_increasing"] for r in recs),
        "labels_match_geodesics": all(c["mismatches"] == 0 for c in clus),
        "event_driven_matches_sweep": all(o["mismatches"] == 0 for o in orac),
    }
    return crit, {"events": sum(r["events"] for r in recs), "jumps": sum(r["jumps"] for r in recs)}


def cmd_verify(cfg, out: Path, workers):
    ids = cfg.get("criteria") or list(CRITERIA)
    bad = [c for c in ids if c not in CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria: {', '.join(map(str, bad))}")
    suite = Suite(seed=cfg["seed"], scale=cfg["scale"], workers=workers)
    results = []
    for cid in ids:
        res = suite.run(cid)
        print(res.line(), flush=True)
        results.append(res)
    doc = {"seed": cfg["seed"], "scale": cfg["scale"], "criteria": [r.as_dict() for r in results]}
    for entry in doc["criteria"]:
        entry.pop("seconds")
    write_json(out / "acceptance.json", doc)
    return {r.id: r.passed for r in results}, {"seconds": {r.id: round(r.seconds, 3) for r in results}}


COMMANDS = {
    "hydro": (cmd_hydro, "closed-form laws and limit-shape samples"),
    "grow": (cmd_grow, "one passage-time field with clusters and competition interface"),
    "compete": (cmd_compete, "ensemble of competition-interface inclinations"),
    "tasep": (cmd_tasep, "ensemble of second-class particle speeds"),
    "profile": (cmd_profile, "pooled density profile against the Burgers solution"),
    "fluct": (cmd_fluct, "variance ladder and fluctuation exponent"),
    "couple": (cmd_couple, "exact coupling and oracle checks"),
    "verify": (cmd_verify, "acceptance suite"),
}
VERIFYING = {"couple", "verify"}


# -- argument handling ------------------------------------------------------

def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"ERROR: usage: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="competition-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="JSON run configuration; flags override it")
        sp.add_argument("--out-dir", dest="out_dir", help="output directory (default results/<command>)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int, help="worker processes (default $COMPETITION_LAB_WORKERS or CPU count)")
        if name not in ("verify",):
            sp.add_argument("--lambda", dest="lambda_", type=float)
            sp.add_argument("--rho", type=float)
        if name in ("compete", "tasep", "profile", "fluct", "couple"):
            sp.add_argument("--replicas", type=int)
        if name in ("tasep", "profile", "couple"):
            sp.add_argument("--t-max", dest="t_max", type=float)
        if name in ("tasep", "fluct"):
            sp.add_argument("--observe-at", dest="observe_at", type=_floats, help="comma-separated times")
        if name == "compete":
            sp.add_argument("--steps", dest="n_steps", type=int)
        if name == "profile":
            sp.add_argument("--bin-width", dest="bin_width", type=float)
        if name == "hydro":
            sp.add_argument("--grid", type=int)
        if name in ("grow", "couple"):
            sp.add_argument("--box", type=int, help="side of the passage-time box")
        if name == "fluct":
            sp.add_argument("--transversal", action="store_true", default=None,
                            help="also measure transversal fluctuations of the competition interface")
        if name == "verify":
            sp.add_argument("--scale", type=float, help="multiplier on every replica count")
            sp.add_argument("--criteria", type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                            help="comma-separated subset, e.g. A1,A12")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    command = args.command
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if "lambda_" in overrides:
        overrides["lambda"] = overrides.pop("lambda_")
    defaults = dict(DEFAULTS[command], out_dir=f"results/{command}")
    try:
        cfg = load_config(args.config, overrides, defaults)
        if command != "verify":
            _params(cfg)
    except (ConfigError, InvalidParams) as exc:
        print(f"ERROR: config: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg["out_dir"])
    func = COMMANDS[command][0]
    workers = cfg.get("workers")
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        if command in ("hydro", "grow"):
            criteria, results = func(cfg, out)
        else:
            criteria, results = func(cfg, out, workers)
    except (ConfigError, InvalidParams) as exc:
        print(f"ERROR: config: {exc}", file=sys.stderr)
        return 2
    except (CompetitionLabError, OSError) as exc:
        print(f"ERROR: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    passed = all(criteria.values())
    write_json(out / "summary.json", {
        "command": command,
        "config": cfg.echo(),
        "version": version_string(),
        "wall_clock_seconds": round(time.perf_counter() - start, 3),
        "criteria": criteria,
        "passed": passed,
        "results": results,
    })
    if command in VERIFYING and not passed:
        failed = ", ".join(k for k, v in criteria.items() if not v)
        print(f"ERROR: verification failed: {failed}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
