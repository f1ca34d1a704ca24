"""Exclusion process with one second-class particle.

Two routes to the same object:

* :func:`simulate_second_class` runs a Gillespie simulation on a finite
  window with the second-class particle as a marked site;
* :func:`derive_tasep_from_lpp` replays the occupation times of a
  :class:`~competition_lab.lpp.PassageField` as exclusion events and follows
  the (hole, particle) couple that starts on sites (0, 1).

Finite windows are made safe by tracking two contamination fronts: every
site strictly between them evolves exactly as in the infinite system.  The
second-class particle must stay ``guard`` sites inside them or the run fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from ._backend import kernels
from .errors import BoundaryContamination, HorizonError
from .lpp import PassageField, trace_competition_interface
from .model import Params, TasepConfig

GUARD = 16


def window_half_width(t_max: float, reach: float = 1.1) -> int:
    """``ceil(reach t) + 8 ceil(sqrt t) + 64``; the default suits observables
    that follow the second-class particle."""
    return math.ceil(reach * t_max) + 8 * math.ceil(math.sqrt(t_max)) + 64


def profile_half_width(params: Params, t_max: float) -> int:
    """Window whose contamination fronts stay outside ``[-t, t]`` up to ``t_max``.

    The left front drifts right at roughly ``1 - lam`` and the right front
    left at roughly ``rho``.
    """
    reach = 1.0 + max(1.0 - params.lam, params.rho) + 0.1
    return window_half_width(t_max, reach)


@dataclass(frozen=True, eq=False)
class TasepTrajectory:
    times: np.ndarray  # observation (or jump) times, starting at 0
    X: np.ndarray  # second-class / couple position at those times
    I: np.ndarray  # hole label of the couple: 1 + forward jumps
    J: np.ndarray  # particle label of the couple: 1 + backward jumps
    final_config: TasepConfig | None
    events: int
    site_lo: int = 0
    snapshots: np.ndarray | None = field(default=None, repr=False)  # (times, sites) int8
    fronts: np.ndarray | None = None  # (times, 2): last contaminated site on each side
    checks: dict = field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[float, int]]:
        return list(zip(self.times.tolist(), self.X.tolist()))

    @property
    def pair_labels(self) -> list[tuple[float, int, int]]:
        return list(zip(self.times.tolist(), self.I.tolist(), self.J.tolist()))

    def index_of(self, t: float) -> int:
        hits = np.flatnonzero(self.times == t)
        if hits.size == 0:
            raise KeyError(f"t={t} is not an observation time")
        return int(hits[0])

    def at(self, t: float) -> tuple[int, int, int]:
        """``(X, I, J)`` at time ``t``: any time up to ``t_max`` for a replayed
        trajectory, an observation time for a simulated one."""
        if self.checks.get("kind") != "derived":
            k = self.index_of(t)
        else:
            if t < 0 or t > self.checks["t_max"]:
                raise HorizonError(f"t={t} outside [0, {self.checks['t_max']}]")
            k = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.X[k]), int(self.I[k]), int(self.J[k])


def initial_configuration(params: Params, half_width: int, guard: int, stream: _rng.RngStream):
    """Sites ``-n..n`` with ``n = half_width + guard``: Bernoulli(lam) left of
    the origin, Bernoulli(rho) right of it, the second-class particle (2) at 0."""
    n = half_width + guard
    sites = np.arange(-n, n + 1)
    u = stream.child(_rng.TASEP_INIT).generator().random(sites.size)
    v = np.where(sites < 0, u < params.lam, u < params.rho).astype(np.int8)
    v[n] = 2
    return -n, v


def simulate_second_class(params: Params, t_max: float, observe_at, stream: _rng.RngStream,
                          half_width: int | None = None, guard: int = GUARD,
                          snapshots: bool = False, initial=None) -> TasepTrajectory:
    """Gillespie run up to ``t_max``, recording the state at each of ``observe_at``.

    ``initial`` may supply ``(site_lo, values)`` with values in {0, 1, 2} and
    exactly one 2; otherwise the two-density product state is drawn.
    Raises :class:`BoundaryContamination` if a contamination front gets within
    ``guard`` sites of the second-class particle.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    obs = np.asarray(sorted(set(float(t) for t in observe_at) | {0.0}), dtype=np.float64)
    if obs[-1] > t_max:
        raise ValueError("observation time beyond t_max")
    if initial is None:
        if half_width is None:
            half_width = window_half_width(t_max)
        site_lo, v = initial_configuration(params, half_width, guard, stream)
    else:
        site_lo, v = initial
        v = np.array(v, dtype=np.int8)
        if np.count_nonzero(v == 2) != 1:
            raise ValueError("initial configuration needs exactly one second-class particle")
    x_index = int(np.flatnonzero(v == 2)[0])
    seed = stream.child(_rng.TASEP_EVENTS).seed
    status, recorded, events, rows, snaps = kernels.tasep_run(v, x_index, seed, float(t_max), obs, guard, snapshots)
    if status:
        raise BoundaryContamination(
            f"contamination front within {guard} sites of the second-class particle before t={t_max}; "
            f"enlarge the window (half width {half_width})"
        )
    X = rows[:, 0] + x_index + site_lo
    fronts = np.column_stack([rows[:, 3] + site_lo, rows[:, 4] + site_lo])
    final = TasepConfig(site_lo, (v == 1).astype(np.int8), anchor=(site_lo - 1, 0, 1 - site_lo),
                        star_pair_site=None, labels=None, second_class_site=int(np.flatnonzero(v == 2)[0]) + site_lo)
    return TasepTrajectory(obs, X, 1 + rows[:, 1], 1 + rows[:, 2], final, int(events), site_lo,
                           snaps, fronts, {"kind": "gillespie"})


def derive_tasep_from_lpp(passage: PassageField, t_max: float) -> TasepTrajectory:
    """Exclusion events ``G(i, j) <= t_max`` replayed in time order.

    Cell ``(i, j)`` swaps particle ``j`` with hole ``i``.  The returned
    trajectory lists the couple after each of its jumps; ``checks`` reports
    ``identity_violations`` (``X != I - J`` after some event),
    ``bad_events`` (a swap whose labels do not match the configuration),
    ``phi_mismatches`` (couple labels differing from the competition path)
    and whether event times were strictly increasing.
    """
    if not passage.full:
        raise HorizonError("the exclusion replay needs a passage field stored in full")
    p = passage
    # Each particle's (row) and hole's (column) events inside the box precede
    # those outside, so the in-box replay is always consistent; what limits
    # t_max is how long the couple's next move stays inside the box.
    path = trace_competition_interface(p)
    if t_max >= path.horizon:
        raise HorizonError(f"t_max={t_max} beyond the competition-path horizon {path.horizon:.6g}")
    mask = p.interior_mask() & (p.G <= t_max)
    rr, cc = np.nonzero(mask)
    g = p.G[rr, cc]
    order = np.argsort(g, kind="stable")
    ev_t = g[order]
    ev_i = np.ascontiguousarray(cc[order] + p.x_lo, dtype=np.int64)
    ev_j = np.ascontiguousarray(rr[order] + p.y_lo, dtype=np.int64)

    prof = p.profile
    px, py = prof.x, prof.y
    down = np.diff(px) == 0
    occ = down.astype(np.int8)
    plab = np.where(down, py[1:] + 1, 0).astype(np.int64)
    hlab = np.where(down, 0, px[1:]).astype(np.int64)
    site_lo = prof.j_min + 1
    jumps = np.zeros((ev_i.size, 4), dtype=np.int64)
    nj, viol, bad = kernels.pair_replay(ev_i, ev_j, occ, plab, hlab, site_lo, jumps)
    jumps = jumps[:nj]

    jump_times = ev_t[jumps[:, 0]]
    phi_mismatch = int(np.count_nonzero(path.steps[1 : nj + 1] != jumps[:, 2:4]))
    phi_mismatch += int(np.count_nonzero(path.times[1 : nj + 1] != jump_times))
    if path.times.size > nj + 1 and path.times[nj + 1] <= t_max:
        phi_mismatch += 1
    strictly = bool(np.all(np.diff(ev_t) > 0))

    times = np.concatenate([[0.0], jump_times])
    X = np.concatenate([[0], jumps[:, 1]])
    I = np.concatenate([[1], jumps[:, 2]])
    J = np.concatenate([[1], jumps[:, 3]])
    couple = int(X[-1])
    final = TasepConfig(site_lo, occ, anchor=(prof.j_min, int(px[0]), int(py[0])),
                        star_pair_site=couple, labels=(int(I[-1]), int(J[-1])))
    checks = {
        "kind": "derived",
        "t_max": float(t_max),
        "events": int(ev_i.size),
        "identity_violations": int(viol),
        "bad_events": int(bad),
        "phi_mismatches": phi_mismatch,
        "strictly_increasing": strictly,
    }
    return TasepTrajectory(times, X, I, J, final, int(ev_i.size), site_lo, None, None, checks)


# -- density profiles -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Occupation fractions in bins ``k`` centred at ``r = k * bin_width``."""

    t: float
    bin_width: float
    k_lo: int
    occupied: np.ndarray
    sites: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return (self.k_lo + np.arange(self.sites.size)) * self.bin_width

    @property
    def density(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.sites > 0, self.occupied / np.maximum(self.sites, 1), np.nan)

    def __add__(self, other: "DensityProfile") -> "DensityProfile":
        if other.t != self.t or other.bin_width != self.bin_width:
            raise ValueError("can only pool profiles at the same time and bin width")
        lo = min(self.k_lo, other.k_lo)
        hi = max(self.k_lo + self.sites.size, other.k_lo + other.sites.size)
        occ = np.zeros(hi - lo, dtype=np.int64)
        cnt = np.zeros(hi - lo, dtype=np.int64)
        for prof in (self, other):
            a = prof.k_lo - lo
            occ[a : a + prof.sites.size] += prof.occupied
            cnt[a : a + prof.sites.size] += prof.sites
        return DensityProfile(self.t, self.bin_width, lo, occ, cnt)


def pool_profiles(profiles) -> DensityProfile:
    profiles = list(profiles)
    if not profiles:
        raise ValueError("nothing to pool")
    out = profiles[0]
    for prof in profiles[1:]:
        out = out + prof
    return out


def density_profile(trajectory: TasepTrajectory, t: float, bin_width: float) -> DensityProfile:
    """Binned occupation at time ``t`` over the uncontaminated sites.

    Site ``j`` goes to bin ``round(j / (t * bin_width))``; bins with no clean
    site come out as NaN in :attr:`DensityProfile.density`.
    """
    if not 0 < bin_width <= 0.5:
        raise ValueError("bin_width must lie in (0, 0.5]")
    if trajectory.snapshots is None:
        raise ValueError("trajectory was run without snapshots")
    if t <= 0:
        raise ValueError("t must be positive")
    k = trajectory.index_of(t)
    snap = trajectory.snapshots[k]
    f, g = trajectory.fronts[k]
    sites = np.arange(trajectory.site_lo, trajectory.site_lo + snap.size)
    clean = (sites > f) & (sites < g)
    bins = np.rint(sites[clean] / (t * bin_width)).astype(np.int64)
    k_lo = int(bins.min())
    occ = np.bincount(bins - k_lo, weights=(snap[clean] != 0)).astype(np.int64)
    cnt = np.bincount(bins - k_lo).astype(np.int64)
    return DensityProfile(float(t), float(bin_width), k_lo, occ, cnt)
