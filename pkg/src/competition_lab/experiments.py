"""Per-replica experiment bodies.

Every function takes the replica stream first and returns a flat dict of
plain Python values, so records pickle cheaply and serialise to JSON as is.

Passage-time boxes are sized adaptively: a box is a deterministic window
onto one realisation (hashed weights, prefix-consistent boundary arms), so
retrying with a larger box changes nothing already computed and the result
does not depend on the first guess.
"""

from __future__ import annotations

import math

import numpy as np

from . import lpp, tasep
from .errors import HorizonError, PathExitsBox
from .hydro import burgers_u
from .model import Params, hashed_weights, sample_initial_interface
from .rng import AUX, RngStream
from .stats import ExperimentSpec

MAX_ATTEMPTS = 8


def _margin(n: float) -> int:
    return math.ceil(4 * math.sqrt(n)) + 16


def _passage(params: Params, stream: RngStream, top: int, store="quadrant"):
    profile = sample_initial_interface(params, top, stream)
    return lpp.compute_passage_times(profile, hashed_weights(stream), top=top, store=store)


# -- competition interface --------------------------------------------------

def initial_top(params: Params, n_steps: int) -> int:
    """Box side expected to contain ``n_steps`` of the competition interface."""
    lam, rho = params.lam, params.rho
    if lam <= rho:
        s = lam * rho / ((1 - lam) * (1 - rho))
        reach = max(1.0, s) / (1.0 + s)
    else:
        reach = 0.6
    return min(n_steps + 2, math.ceil(reach * n_steps * 1.05) + _margin(n_steps))


def competition_path(params: Params, stream: RngStream, n_steps: int):
    """``n_steps`` of the competition interface, enlarging the box on exit.

    Returns ``(path, top, attempts)``.
    """
    top = initial_top(params, n_steps)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        field = _passage(params, stream, top)
        try:
            return lpp.trace_competition_interface(field, n_steps), top, attempt
        except PathExitsBox as exc:
            if top >= n_steps + 2:
                raise
            k = max(exc.steps, 1)
            x, y = exc.position
            remaining = n_steps - k
            guess = max(x + remaining * (x - 1) / k, y + remaining * (y - 1) / k)
            top = min(n_steps + 2, max(math.ceil(1.3 * top), math.ceil(1.05 * guess) + _margin(n_steps)))
    raise PathExitsBox(f"no box up to side {top} contained the path", steps=None)


def inclination_replica(stream: RngStream, params: Params, n_steps: int) -> dict:
    path, top, attempts = competition_path(params, stream, n_steps)
    i, j = (int(v) for v in path.steps[-1])
    return {"I": i, "J": j, "tan_alpha": j / i, "top": top, "attempts": attempts}


def duality_replica(stream: RngStream, params: Params, n_steps: int, corner: int) -> dict:
    """Vertical steps among the first ``n_steps`` of the forward competition
    interface and, on an independent realisation, of the backward polymer
    from ``(corner, corner)``."""
    path, _, _ = competition_path(params, stream, n_steps)
    forward_up = int(np.count_nonzero(np.diff(path.steps[:, 1])))
    back_stream = stream.child(AUX)
    field = _passage(params, back_stream, corner, store=(corner - n_steps, corner - n_steps))
    poly = lpp.trace_backward_polymer(field, (corner, corner), n_steps)
    backward_down = int(np.count_nonzero(np.diff(poly.path[:, 1])))
    return {"forward_up": forward_up, "backward_down": backward_down}


# -- exclusion process ------------------------------------------------------

def speed_replica(stream: RngStream, params: Params, t_max: float, observe_at: tuple) -> dict:
    traj = tasep.simulate_second_class(params, t_max, observe_at, stream)
    keep = traj.times > 0
    return {
        "t": traj.times[keep].tolist(),
        "X": traj.X[keep].tolist(),
        "I": traj.I[keep].tolist(),
        "J": traj.J[keep].tolist(),
        "events": traj.events,
    }


def profile_replica(stream: RngStream, params: Params, t: float, bin_width: float) -> dict:
    half = tasep.profile_half_width(params, t)
    traj = tasep.simulate_second_class(params, t, [t], stream, half_width=half, snapshots=True)
    prof = tasep.density_profile(traj, t, bin_width)
    return {
        "t": t,
        "k_lo": prof.k_lo,
        "occupied": prof.occupied.tolist(),
        "sites": prof.sites.tolist(),
        "X": int(traj.X[-1]),
    }


def profile_from_records(records, t: float, bin_width: float) -> tasep.DensityProfile:
    return tasep.pool_profiles(
        tasep.DensityProfile(t, bin_width, r["k_lo"], np.asarray(r["occupied"]), np.asarray(r["sites"]))
        for r in records
    )


def coupling_top(params: Params, t_max: float) -> int:
    lam, rho = params.lam, params.rho
    if lam <= rho:
        reach = max((1 - rho) * (1 - lam), lam * rho)
    else:
        reach = max((1 - rho) ** 2, lam**2)
    return math.ceil(reach * t_max * 1.1) + _margin(t_max)


def coupling_replica(stream: RngStream, params: Params, t_max: float) -> dict:
    """Replay the exclusion events of one passage field and count failures of
    ``X = I - J`` and of the couple following the competition interface."""
    top = coupling_top(params, t_max)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        field = _passage(params, stream, top, store="full")
        try:
            traj = tasep.derive_tasep_from_lpp(field, t_max)
            break
        except HorizonError:
            if attempt == MAX_ATTEMPTS:
                raise
            top = math.ceil(1.5 * top)
    c = traj.checks
    return {
        "identity_violations": c["identity_violations"],
        "bad_events": c["bad_events"],
        "phi_mismatches": c["phi_mismatches"],
        "strictly_increasing": c["strictly_increasing"],
        "events": c["events"],
        "jumps": int(traj.times.size - 1),
        "X": int(traj.X[-1]),
        "I": int(traj.I[-1]),
        "J": int(traj.J[-1]),
        "top": top,
    }


# -- lattice checks ---------------------------------------------------------

def clusters_replica(stream: RngStream, params: Params, side: int) -> dict:
    """Cluster labels against the origin side of every backtracked geodesic."""
    field = _passage(params, stream, side, store="full")
    labels = lpp.label_clusters(field)
    origins = lpp.origin_sides(field)
    inside = field.interior_mask()
    mismatches = int(np.count_nonzero(labels.sigma[inside] != origins[inside]))
    return {
        "interior": int(inside.sum()),
        "mismatches": mismatches,
        "cluster1": int(np.count_nonzero(labels.sigma[inside] == 1)),
    }


def oracle_replica(stream: RngStream, params: Params, side: int) -> dict:
    """Event-driven growth against the row sweep on one box."""
    profile = sample_initial_interface(params, side, stream)
    weights = hashed_weights(stream)
    sweep = lpp.compute_passage_times(profile, weights, top=side)
    driven, events = lpp.event_driven_growth(profile, weights, top=side)
    return {
        "cells": int(sweep.interior_count),
        "events": int(events),
        "mismatches": int(np.count_nonzero(sweep.G != driven.G)),
    }


def shape_replica(stream: RngStream, params: Params, t: float) -> dict:
    """Rescaled growth interface at time ``t`` against the limit shape."""
    from .hydro import limit_shape

    top = math.ceil(1.15 * t) + _margin(t)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        field = _passage(params, stream, top, store="full")
        if field.safe_horizon() > t:
            break
        top = math.ceil(1.3 * top)
    else:
        raise HorizonError(f"no box up to side {top} covers time {t}")
    gamma = lpp.growth_interface_at(field, t)
    dev = limit_shape(params).deviation(gamma.points(), t)
    return {"deviation": dev, "top": top, "points": int(len(gamma))}


# -- dispatch ---------------------------------------------------------------

def replica_job(spec: ExperimentSpec):
    """``(function, master seed, extra args)`` for :func:`stats.run_replicas`."""
    p, o = spec.params, spec.options
    if spec.kind == "inclination":
        return inclination_replica, spec.seed, (p, int(spec.horizon))
    if spec.kind in ("speed", "fluctuation"):
        obs = spec.observe_at or (spec.horizon,)
        return speed_replica, spec.seed, (p, float(spec.horizon), tuple(obs))
    if spec.kind == "profile":
        return profile_replica, spec.seed, (p, float(spec.horizon), float(o.get("bin_width", 0.02)))
    if spec.kind == "coupling":
        return coupling_replica, spec.seed, (p, float(spec.horizon))
    if spec.kind == "duality":
        return duality_replica, spec.seed, (p, int(spec.horizon), int(o.get("corner", 1500)))
    if spec.kind == "clusters":
        return clusters_replica, spec.seed, (p, int(spec.horizon))
    if spec.kind == "oracle":
        return oracle_replica, spec.seed, (p, int(spec.horizon))
    if spec.kind == "shape":
        return shape_replica, spec.seed, (p, float(spec.horizon))
    raise ValueError(spec.kind)


def hydro_law(params: Params):
    return lambda r: burgers_u(params, r, 1.0)
