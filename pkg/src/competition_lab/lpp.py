"""Last-passage growth on the random sector.

``compute_passage_times`` runs the recursion
``G(z) = max(G(z - (1,0)), G(z - (0,1))) + w(z)`` with ``G = 0`` on the
initial staircase, sweeping rows bottom-up inside the box
``[x_lo, top] x [y_lo, top]`` cut out by the staircase.  Everything else in
this module reads the resulting :class:`PassageField`.

Tie rules (only reachable with zero boundary values or degenerate weights):
backward steps prefer the left predecessor unless it is the corner (1,1);
forward steps of the competition interface prefer going up.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import HorizonError, PathExitsBox, UncoveredSite
from .model import InterfaceProfile, WeightField

_EMPTY_WEIGHTS = np.zeros((0, 0), dtype=np.float64)


@dataclass(frozen=True, eq=False)
class PassageField:
    profile: InterfaceProfile
    weights: WeightField
    top: int
    x_lo: int
    y_lo: int
    heights: np.ndarray  # top of the boundary in columns x_lo..top
    row_start: np.ndarray  # first interior column of rows y_lo..top
    store_x0: int
    store_y0: int
    G: np.ndarray  # rows store_y0..top, columns store_x0..top
    interior_count: int

    @property
    def full(self) -> bool:
        return self.store_x0 == self.x_lo and self.store_y0 == self.y_lo

    def stored(self, x: int, y: int) -> bool:
        return self.store_x0 <= x <= self.top and self.store_y0 <= y <= self.top

    def is_interior(self, x: int, y: int) -> bool:
        return self.x_lo < x <= self.top and y <= self.top and y > self.heights[x - self.x_lo]

    def value(self, x: int, y: int) -> float:
        if not self.stored(x, y):
            raise UncoveredSite(f"site {(x, y)} outside the stored region")
        return float(self.G[y - self.store_y0, x - self.store_x0])

    __call__ = value

    def interior_mask(self) -> np.ndarray:
        xs = np.arange(self.store_x0, self.top + 1)
        ys = np.arange(self.store_y0, self.top + 1)
        return ys[:, None] > self.heights[xs - self.x_lo][None, :]

    def safe_horizon(self) -> float:
        """Largest time whose occupied set stays strictly inside the box."""
        if self.store_y0 > self.y_lo + 1 and self.store_x0 > self.x_lo + 1:
            raise UncoveredSite("safe horizon needs a full field")
        mask = self.interior_mask()
        top_row = self.G[-1][mask[-1]]
        right_col = self.G[:, -1][mask[:, -1]]
        both = np.concatenate([top_row, right_col])
        return float(both.min()) if both.size else float("inf")


def box_geometry(profile: InterfaceProfile, top: int | None = None):
    """Return ``(top, x_lo, y_lo, heights, row_start)`` for the largest (or a
    given) box the staircase fully bounds."""
    ys = profile.y
    max_top = int(min(ys[0], profile.x[-1]))
    if top is None:
        top = max_top
    elif top > max_top:
        raise UncoveredSite(f"boundary only covers a box of side {max_top}, asked for {top}")
    x_lo = int(profile.x[0])
    if top <= x_lo:
        raise UncoveredSite("empty box")
    heights = profile.column_tops(x_lo, top)
    last_in_top = int(np.searchsorted(profile.x, top, side="right")) - 1
    y_lo = top - (profile.j_min + last_in_top)
    rows = np.arange(y_lo, top + 1, dtype=np.int64)
    row_start = x_lo + np.searchsorted(-heights, -rows, side="right").astype(np.int64)
    return top, x_lo, int(y_lo), heights, row_start


def _store_origin(store, x_lo, y_lo, top):
    if store is None or store == "full":
        return x_lo, y_lo
    if store == "quadrant":
        sx, sy = 1, 1
    else:
        sx, sy = store
    sx, sy = max(int(sx), x_lo), max(int(sy), y_lo)
    if sx > top or sy > top:
        raise UncoveredSite("stored region is empty")
    return sx, sy


def compute_passage_times(profile: InterfaceProfile, weights: WeightField, top: int | None = None,
                          store="full") -> PassageField:
    """Occupation times on the box bounded by ``profile``.

    ``store`` selects what is kept: ``"full"``, ``"quadrant"`` (x, y >= 1) or
    an ``(x0, y0)`` lower-left corner.  Only two rows are live during the
    sweep, so memory follows the stored region.
    """
    top, x_lo, y_lo, heights, row_start = box_geometry(profile, top)
    sx, sy = _store_origin(store, x_lo, y_lo, top)
    if weights.hashed and weights.box is None:
        seed, block, use = weights.seed, _EMPTY_WEIGHTS, False
    else:
        block, seed, use = np.ascontiguousarray(weights.block(x_lo, top, y_lo, top)), 0, True
    out = np.zeros((top - sy + 1, top - sx + 1), dtype=np.float64)
    count = kernels.passage_sweep(row_start, x_lo, y_lo, top, seed, block, use, sx, sy, out)
    return PassageField(profile, weights, top, x_lo, y_lo, heights, row_start, sx, sy, out, int(count))


def event_driven_growth(profile: InterfaceProfile, weights: WeightField, top: int | None = None):
    """Continuous-time growth: a vacant site activates once both predecessors
    are occupied and fires after its own weight.  Independent of the sweep;
    returns ``(PassageField, events)``."""
    top, x_lo, y_lo, heights, row_start = box_geometry(profile, top)
    nx, ny = top - x_lo + 1, top - y_lo + 1
    G = np.zeros((ny, nx), dtype=np.float64)
    occupied = np.zeros((ny, nx), dtype=bool)
    for c in range(nx):
        occupied[: heights[c] - y_lo + 1, c] = True

    def interior(x, y):
        return x <= top and y <= top and y > heights[x - x_lo]

    queue = []
    for y in range(y_lo + 1, top + 1):
        for x in range(int(row_start[y - y_lo]), top + 1):
            if occupied[y - y_lo, x - 1 - x_lo] and occupied[y - 1 - y_lo, x - x_lo]:
                t = max(G[y - y_lo, x - 1 - x_lo], G[y - 1 - y_lo, x - x_lo]) + weights.value(x, y)
                heapq.heappush(queue, (t, x, y))
    events = 0
    while queue:
        t, x, y = heapq.heappop(queue)
        G[y - y_lo, x - x_lo] = t
        occupied[y - y_lo, x - x_lo] = True
        events += 1
        for nx_, ny_ in ((x + 1, y), (x, y + 1)):
            if interior(nx_, ny_) and occupied[ny_ - y_lo, nx_ - 1 - x_lo] and occupied[ny_ - 1 - y_lo, nx_ - x_lo]:
                left = G[ny_ - y_lo, nx_ - 1 - x_lo]
                down = G[ny_ - 1 - y_lo, nx_ - x_lo]
                heapq.heappush(queue, ((left if left > down else down) + weights.value(nx_, ny_), nx_, ny_))
    field = PassageField(profile, weights, top, x_lo, y_lo, heights, row_start, x_lo, y_lo, G, events)
    return field, events


# -- clusters ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClusterLabels:
    """Labels on the full box: 1 or 2 on interior sites and on the arms,
    0 at the corner (1,1)."""

    passage: PassageField
    sigma: np.ndarray

    def __call__(self, x: int, y: int) -> int:
        p = self.passage
        return int(self.sigma[y - p.y_lo, x - p.x_lo])


def _boundary_labels(p: PassageField) -> np.ndarray:
    xs = np.arange(p.x_lo, p.top + 1)
    ys = np.arange(p.y_lo, p.top + 1)
    j = xs[None, :] - ys[:, None]
    return np.where(j < 0, 1, np.where(j > 0, 2, 0)).astype(np.int8)


def _require_full(p: PassageField, what: str):
    if not p.full:
        raise UncoveredSite(f"{what} needs a passage field computed with store='full'")


def label_clusters(passage: PassageField) -> ClusterLabels:
    _require_full(passage, "cluster labelling")
    p = passage
    sigma = _boundary_labels(p)
    kernels.label_sweep(p.G, p.row_start, p.x_lo, p.y_lo, p.top, sigma)
    for (x, y), k in (((1, 2), 1), ((2, 1), 2)):
        if p.is_interior(x, y):
            sigma[y - p.y_lo, x - p.x_lo] = k
    return ClusterLabels(p, sigma)


def origin_sides(passage: PassageField) -> np.ndarray:
    """Boundary arm (1 or 2) at which the maximising path to each site starts.

    Vectorised backtracking: every interior site points at its maximising
    predecessor and the pointers are doubled until they reach the boundary.
    Non-interior cells carry their own arm label.
    """
    _require_full(passage, "origin sides")
    p = passage
    G = p.G
    ny, nx = G.shape
    inside = p.interior_mask()
    xs = np.arange(p.x_lo, p.top + 1)
    ys = np.arange(p.y_lo, p.top + 1)
    flat = np.arange(ny * nx).reshape(ny, nx)
    gl = np.zeros_like(G)
    gd = np.zeros_like(G)
    gl[:, 1:] = G[:, :-1]
    gd[1:, :] = G[:-1, :]
    corner_left = (xs[None, :] == 2) & (ys[:, None] == 1)
    go_left = (gl > gd) | ((gl == gd) & ~corner_left)
    parent = np.where(go_left, flat - 1, flat - nx)
    parent = np.where(inside, parent, flat).ravel()
    while True:
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            break
        parent = nxt
    labels = _boundary_labels(p).ravel()
    return labels[parent].reshape(ny, nx)


# -- competition interface --------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompetitionPath:
    steps: np.ndarray  # (N + 1, 2), steps[0] = (1, 1)
    times: np.ndarray  # G(phi_n); times[0] = 0
    next_time: float | None  # G(phi_{N+1}) when it lies in the box

    @property
    def n_steps(self) -> int:
        return len(self.steps) - 1

    @property
    def horizon(self) -> float:
        return self.next_time if self.next_time is not None else float(self.times[-1])


def trace_competition_interface(passage: PassageField, n_steps: int | None = None) -> CompetitionPath:
    """Follow the smaller of the two forward neighbours from (1,1).

    With ``n_steps`` the path must fit in the box, otherwise
    :class:`PathExitsBox` is raised; without it the path runs until its next
    step would leave the box.
    """
    p = passage
    if not (p.store_x0 <= 1 and p.store_y0 <= 1):
        raise UncoveredSite("the competition interface needs the quadrant stored")
    G, sx, sy, top = p.G, p.store_x0, p.store_y0, p.top
    limit = n_steps if n_steps is not None else 2 * top
    x, y = 1, 1
    xs, ys, ts = [1], [1], [0.0]
    next_time = None
    for n in range(limit + 1):
        if x + 1 > top or y + 1 > top:
            if n_steps is not None and n < n_steps:
                raise PathExitsBox(f"competition interface left the box after {n} steps",
                                   steps=n, position=(x, y))
            break
        right = G[y - sy, x + 1 - sx]
        up = G[y + 1 - sy, x - sx]
        if n == limit:
            next_time = float(min(right, up))
            break
        if right < up:
            x += 1
            ts.append(float(right))
        else:
            y += 1
            ts.append(float(up))
        xs.append(x)
        ys.append(y)
    return CompetitionPath(np.column_stack([xs, ys]).astype(np.int64), np.asarray(ts), next_time)


class PsiProcess:
    """Right-continuous ``psi(t) = phi_n`` for ``G(phi_n) <= t < G(phi_{n+1})``."""

    def __init__(self, path: CompetitionPath):
        self.path = path

    @property
    def horizon(self) -> float:
        return self.path.horizon

    def __call__(self, t: float) -> tuple[int, int]:
        if t < 0:
            raise ValueError("negative time")
        if t >= self.horizon:
            raise HorizonError(f"t={t} at or beyond the last determined event time {self.horizon}")
        n = int(np.searchsorted(self.path.times, t, side="right")) - 1
        return int(self.path.steps[n, 0]), int(self.path.steps[n, 1])

    def at(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if np.any(times >= self.horizon) or np.any(times < 0):
            raise HorizonError("requested times outside [0, horizon)")
        n = np.searchsorted(self.path.times, times, side="right") - 1
        return self.path.steps[n]


def competition_event_process(path: CompetitionPath) -> PsiProcess:
    return PsiProcess(path)


# -- geodesics --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Geodesic:
    path: np.ndarray  # from the start site backwards; last row on the boundary unless truncated
    energy: float  # sum of weights over the interior sites of the path
    origin: int | None  # arm reached (1 or 2); None for a truncated prefix


def _backward_walk(p: PassageField, z, max_steps):
    x, y = int(z[0]), int(z[1])
    if not p.is_interior(x, y):
        raise ValueError(f"{(x, y)} is not an interior site")
    G, sx, sy = p.G, p.store_x0, p.store_y0
    pts = [(x, y)]
    steps = 0
    while p.is_interior(x, y) and steps < max_steps:
        if x - 1 < sx or y - 1 < sy:
            raise UncoveredSite("backward path leaves the stored region")
        gl = G[y - sy, x - 1 - sx]
        gd = G[y - 1 - sy, x - sx]
        if gl > gd or (gl == gd and not (x == 2 and y == 1)):
            x -= 1
        else:
            y -= 1
        pts.append((x, y))
        steps += 1
    return np.asarray(pts, dtype=np.int64)


def backtrack_geodesic(passage: PassageField, z) -> Geodesic:
    """Maximising path from ``z`` back to the initial staircase."""
    p = passage
    pts = _backward_walk(p, z, max_steps=10**12)
    energy = 0.0
    for x, y in pts[-2::-1]:
        energy += p.weights.value(int(x), int(y))
    bx, by = pts[-1]
    origin = 1 if bx - by < 0 else 2
    return Geodesic(pts, energy, origin)


def trace_backward_polymer(passage: PassageField, z, n_steps: int) -> Geodesic:
    """First ``n_steps`` of the backward maximising polymer from ``z``."""
    pts = _backward_walk(passage, z, max_steps=n_steps)
    if len(pts) - 1 < n_steps:
        raise PathExitsBox(f"polymer reached the boundary after {len(pts) - 1} steps", steps=len(pts) - 1)
    energy = 0.0
    for x, y in pts[-2::-1]:
        energy += passage.weights.value(int(x), int(y))
    return Geodesic(pts, energy, None)


# -- growth interface -------------------------------------------------------

def growth_interface_at(passage: PassageField, t: float) -> InterfaceProfile:
    """Staircase of sites with ``G <= t`` whose up-right diagonal neighbour is
    still vacant, continued by the initial staircase outside the box."""
    _require_full(passage, "the growth interface")
    p = passage
    if t < 0:
        raise ValueError("negative time")
    horizon = p.safe_horizon()
    if t >= horizon:
        raise HorizonError(f"t={t} beyond the safe horizon {horizon:.6g} of this box")
    counts = np.count_nonzero((p.G <= t) & p.interior_mask(), axis=0)
    prof = p.profile
    x_end = int(prof.x[-1])
    h = np.empty(x_end - p.x_lo + 2, dtype=np.int64)
    h[: p.top - p.x_lo + 1] = p.heights + counts
    if x_end > p.top:
        h[p.top - p.x_lo + 1 : -1] = prof.column_tops(p.top + 1, x_end)
    h[-1] = int(prof.y[-1])
    reps = h[:-1] - h[1:] + 1
    xs = np.repeat(np.arange(p.x_lo, x_end + 1, dtype=np.int64), reps)
    return InterfaceProfile(p.x_lo - int(h[0]), xs)
