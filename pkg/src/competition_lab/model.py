"""Domain types: sector parameters, staircase interfaces, exclusion
configurations and site weights, plus the interface <-> TASEP bijection.

Lattice conventions
-------------------
A down-right staircase is indexed by ``j``; the point with index ``j`` always
satisfies ``x - y = j`` because both allowed increments, ``(1, 0)`` and
``(0, -1)``, raise ``x - y`` by one.  A profile is therefore stored as its
first index plus the x-coordinate of every point.  Step ``j`` (from point
``j - 1`` to point ``j``) is a hole of the exclusion process when it goes
right and a particle when it goes down.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from ._backend import kernels
from .errors import InvalidParams, MalformedProfile, UncoveredSite


class Regime(str, enum.Enum):
    SHOCK = "shock"
    STATIONARY = "stationary"
    RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class Params:
    """Boundary densities: ``lam`` on the upper-left arm, ``rho`` on the lower-right arm."""

    lam: float
    rho: float

    def __post_init__(self):
        lam, rho = float(self.lam), float(self.rho)
        if not (0.0 < lam <= 1.0):
            raise InvalidParams(f"lambda must lie in (0, 1], got {self.lam}")
        if not (0.0 <= rho < 1.0):
            raise InvalidParams(f"rho must lie in [0, 1), got {self.rho}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "rho", rho)

    @property
    def regime(self) -> Regime:
        if self.lam < self.rho:
            return Regime.SHOCK
        if self.lam > self.rho:
            return Regime.RAREFACTION
        return Regime.STATIONARY

    @property
    def theta(self) -> float:
        """Sector angle in degrees, swept counterclockwise from the lower arm
        direction ``(1-rho, -rho)`` to the upper arm direction ``(lam-1, lam)``."""
        lower = math.degrees(math.atan2(-self.rho, 1.0 - self.rho))
        upper = math.degrees(math.atan2(self.lam, self.lam - 1.0))
        return upper - lower


@dataclass(frozen=True, eq=False)
class InterfaceProfile:
    j_min: int
    x: np.ndarray  # x-coordinate of points j_min, j_min + 1, ...

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.int64)
        if x.ndim != 1 or x.size == 0:
            raise MalformedProfile("a profile needs at least one point")
        if x.size > 1:
            d = np.diff(x)
            if np.any((d != 0) & (d != 1)):
                raise MalformedProfile("increments must be (1, 0) or (0, -1)")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "j_min", int(self.j_min))

    @property
    def j_max(self) -> int:
        return self.j_min + self.x.size - 1

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1, dtype=np.int64)

    @property
    def y(self) -> np.ndarray:
        return self.x - self.j

    def point(self, j: int) -> tuple[int, int]:
        if not self.j_min <= j <= self.j_max:
            raise IndexError(f"index {j} outside [{self.j_min}, {self.j_max}]")
        x = int(self.x[j - self.j_min])
        return x, x - j

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def __eq__(self, other):
        if not isinstance(other, InterfaceProfile):
            return NotImplemented
        return self.j_min == other.j_min and np.array_equal(self.x, other.x)

    def __len__(self):
        return self.x.size

    @classmethod
    def from_points(cls, points) -> "InterfaceProfile":
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise MalformedProfile("expected an (n, 2) array of points")
        j = pts[:, 0] - pts[:, 1]
        if np.any(np.diff(j) != 1):
            raise MalformedProfile("consecutive points must differ by (1, 0) or (0, -1)")
        return cls(int(j[0]), pts[:, 0])

    # -- geometry used by the passage-time engine ---------------------------
    def column_tops(self, x_from: int, x_to: int) -> np.ndarray:
        """Highest profile point in each column ``x_from..x_to``."""
        cols = np.arange(x_from, x_to + 1, dtype=np.int64)
        if x_from < self.x[0] or x_to > self.x[-1]:
            raise UncoveredSite(f"columns [{x_from}, {x_to}] leave the profile")
        first = np.searchsorted(self.x, cols, side="left")
        return cols - (self.j_min + first)


@dataclass(frozen=True, eq=False)
class TasepConfig:
    """Occupancy on the sites ``lo..lo + len(occupancy) - 1``.

    ``anchor = (j, x, y)`` pins point ``j`` of the matching staircase so the
    interface can be rebuilt; ``star_pair_site`` is the left site of the
    (hole, particle) couple when it is tracked.
    """

    lo: int
    occupancy: np.ndarray
    anchor: tuple[int, int, int] = (0, 1, 1)
    star_pair_site: int | None = 0
    labels: tuple[int, int] | None = (1, 1)
    second_class_site: int | None = None

    def __post_init__(self):
        occ = np.ascontiguousarray(self.occupancy, dtype=np.int8)
        if occ.ndim != 1 or np.any((occ != 0) & (occ != 1)):
            raise MalformedProfile("occupancy must be a 0/1 vector")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def hi(self) -> int:
        return self.lo + self.occupancy.size - 1

    def __getitem__(self, j: int) -> int:
        if not self.lo <= j <= self.hi:
            raise IndexError(j)
        return int(self.occupancy[j - self.lo])


@dataclass(frozen=True, eq=False)
class WeightField:
    """Exp(1) site weights.

    With ``values`` set, the weights are that array over
    ``box = (x0, x1, y0, y1)``.  Otherwise they are the counter-based hash of
    ``seed``, defined on every site of the plane.
    """

    seed: int | None = None
    box: tuple[int, int, int, int] | None = None
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.values is not None:
            v = np.ascontiguousarray(self.values, dtype=np.float64)
            x0, x1, y0, y1 = self.box
            if v.shape != (y1 - y0 + 1, x1 - x0 + 1):
                raise ValueError("values shape does not match box")
            v.setflags(write=False)
            object.__setattr__(self, "values", v)
        elif self.seed is None:
            raise ValueError("need a seed or explicit values")

    @classmethod
    def from_array(cls, values, x0: int, y0: int) -> "WeightField":
        v = np.asarray(values, dtype=np.float64)
        return cls(box=(x0, x0 + v.shape[1] - 1, y0, y0 + v.shape[0] - 1), values=v)

    @classmethod
    def constant(cls, box, value: float = 1.0) -> "WeightField":
        x0, x1, y0, y1 = box
        return cls(box=box, values=np.full((y1 - y0 + 1, x1 - x0 + 1), float(value)))

    @property
    def hashed(self) -> bool:
        return self.values is None

    def covers(self, x0, x1, y0, y1) -> bool:
        if self.values is None:
            return self.box is None or (
                self.box[0] <= x0 and x1 <= self.box[1] and self.box[2] <= y0 and y1 <= self.box[3]
            )
        bx0, bx1, by0, by1 = self.box
        return bx0 <= x0 and x1 <= bx1 and by0 <= y0 and y1 <= by1

    def value(self, x: int, y: int) -> float:
        if self.values is None:
            return _rng.site_weight(self.seed, x, y)
        x0, x1, y0, y1 = self.box
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            raise UncoveredSite(f"no weight for site {(x, y)}")
        return float(self.values[y - y0, x - x0])

    def block(self, x0, x1, y0, y1) -> np.ndarray:
        if not self.covers(x0, x1, y0, y1):
            raise UncoveredSite(f"weights do not cover [{x0},{x1}]x[{y0},{y1}]")
        if self.values is None:
            return kernels.fill_weights(self.seed, x0, x1, y0, y1)
        bx0, _, by0, _ = self.box
        return self.values[y0 - by0 : y1 - by0 + 1, x0 - bx0 : x1 - bx0 + 1]


def _arm_steps(gen: np.random.Generator, p: float, target: int, chunk: int = 4096) -> np.ndarray:
    """Bernoulli(p) steps until ``target`` successes have been drawn."""
    if target <= 0:
        return np.zeros(0, dtype=bool)
    parts = []
    hits = 0
    while True:
        draw = gen.random(chunk) < p
        c = np.cumsum(draw)
        if hits + c[-1] >= target:
            stop = int(np.searchsorted(c, target - hits)) + 1
            parts.append(draw[:stop])
            return np.concatenate(parts)
        parts.append(draw)
        hits += int(c[-1])


def sample_initial_interface(params: Params, coverage: int, stream: _rng.RngStream) -> InterfaceProfile:
    """Random initial staircase through (0,1), (1,1), (1,0).

    The upper-left arm steps up w.p. ``lam`` (else left) until its height
    exceeds ``coverage``; the lower-right arm steps down w.p. ``rho`` (else
    right) until its abscissa exceeds ``coverage``.  Each arm uses its own
    child stream, so a larger ``coverage`` extends the same arms.
    """
    if coverage < 1:
        raise ValueError("coverage must be >= 1")
    # upper arm: a success is an up step; we need `coverage` of them to pass y = coverage
    up = _arm_steps(stream.child(_rng.ARM_NEG).generator(), params.lam, coverage)
    # lower arm: a success is a right step, `coverage` of them to pass x = coverage
    right = _arm_steps(stream.child(_rng.ARM_POS).generator(), 1.0 - params.rho, coverage)
    # x along the upper arm, walking away from (0, 1): left steps lower x by one
    x_neg = -np.cumsum(~up, dtype=np.int64)
    x_pos = 1 + np.cumsum(right, dtype=np.int64)
    x = np.concatenate([x_neg[::-1], [0, 1, 1], x_pos])
    return InterfaceProfile(-(up.size + 1), x)


def interface_to_tasep(profile: InterfaceProfile) -> TasepConfig:
    """Particle at site j iff step j of the staircase goes down."""
    if len(profile) < 2:
        raise MalformedProfile("need at least one step")
    occ = (np.diff(profile.x) == 0).astype(np.int8)
    if profile.j_min <= 0 <= profile.j_max:
        anchor = (0, *profile.point(0))
    else:
        anchor = (profile.j_min, *profile.point(profile.j_min))
    lo = profile.j_min + 1
    star = None
    if lo <= 0 and 1 <= profile.j_max and occ[-lo] == 0 and occ[1 - lo] == 1:
        star = 0
    return TasepConfig(lo, occ, anchor=anchor, star_pair_site=star, labels=(1, 1) if star == 0 else None)


def tasep_to_interface(config: TasepConfig) -> InterfaceProfile:
    """Rebuild the staircase from its increments, pinned at ``config.anchor``."""
    ja, xa, ya = config.anchor
    if xa - ya != ja:
        raise MalformedProfile("anchor point inconsistent with its index")
    j_min = config.lo - 1
    if not j_min <= ja <= config.hi:
        raise MalformedProfile("anchor outside the window")
    dx = 1 - config.occupancy.astype(np.int64)
    x = np.concatenate([[0], np.cumsum(dx)])
    x += xa - x[ja - j_min]
    return InterfaceProfile(j_min, x)


def sample_weights(box, stream: _rng.RngStream) -> WeightField:
    """Materialised i.i.d. Exp(1) weights on ``box = (x0, x1, y0, y1)``.

    The values equal the hashed field of ``stream.child(WEIGHTS)`` restricted
    to the box.
    """
    x0, x1, y0, y1 = box
    if x1 < x0 or y1 < y0:
        raise ValueError("empty box")
    seed = stream.child(_rng.WEIGHTS).seed
    return WeightField(seed=seed, box=tuple(box), values=kernels.fill_weights(seed, x0, x1, y0, y1))


def hashed_weights(stream: _rng.RngStream) -> WeightField:
    return WeightField(seed=stream.child(_rng.WEIGHTS).seed)
