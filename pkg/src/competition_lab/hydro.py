"""Closed-form hydrodynamic laws for the two-density initial condition.

Densities are ``lam`` left of the origin and ``rho`` right of it; the flux is
``f(u) = u (1 - u)`` and characteristics move at ``1 - 2u``.  A shock forms
when ``lam < rho`` and a rarefaction fan when ``lam > rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import Params, Regime


def flux(u):
    return u * (1.0 - u)


def shock_speed(params: Params) -> float:
    return 1.0 - params.lam - params.rho


def burgers_u(params: Params, r, t: float = 1.0):
    """Entropy solution ``u(r, t)``; scalar in, scalar out."""
    if not t > 0:
        raise ValueError("t must be positive")
    lam, rho = params.lam, params.rho
    r_arr = np.asarray(r, dtype=float)
    if lam == rho:
        out = np.full_like(r_arr, lam)
    elif lam < rho:
        out = np.where(r_arr <= (1.0 - lam - rho) * t, lam, rho)
    else:
        fan = 0.5 - r_arr / (2.0 * t)
        out = np.where(r_arr < (1.0 - 2 * lam) * t, lam, np.where(r_arr > (1.0 - 2 * rho) * t, rho, fan))
    return float(out) if out.ndim == 0 else out


def characteristic(params: Params, a: float, t: float):
    """Position at time ``t`` of the characteristic started at ``a``.

    From the origin this is the fan interval ``(lo, hi)`` in the rarefaction
    case and the shock position otherwise.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    lam, rho = params.lam, params.rho
    if a < 0:
        return a + (1.0 - 2 * lam) * t
    if a > 0:
        return a + (1.0 - 2 * rho) * t
    if lam > rho:
        return ((1.0 - 2 * lam) * t, (1.0 - 2 * rho) * t)
    if lam < rho:
        return (1.0 - lam - rho) * t
    return (1.0 - 2 * lam) * t


def sector_angle(params: Params) -> float:
    return params.theta


def mass_defect(params: Params, t: float, half_window: float) -> float:
    """``int (u(r,t) - u(r,0)) dr`` over ``[-W, W]`` minus the net inflow
    ``t (f(lam) - f(rho))``; zero once the window contains the wave."""
    lam, rho = params.lam, params.rho
    breaks = [x for x in ((1 - 2 * lam) * t, (1 - 2 * rho) * t, (1 - lam - rho) * t, 0.0)
              if -half_window < x < half_window]
    val, _ = integrate.quad(lambda r: burgers_u(params, r, t) - (lam if r < 0 else rho),
                            -half_window, half_window, points=breaks or None, epsabs=1e-12, limit=200)
    return val - t * (flux(lam) - flux(rho))


# -- distributions ----------------------------------------------------------

@dataclass(frozen=True)
class PointMass:
    value: float

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.value, 1.0, 0.0)

    def cdf_left(self, x):
        return np.where(np.asarray(x, dtype=float) > self.value, 1.0, 0.0)

    def quantile(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.value)

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        return np.full(n, self.value)

    @property
    def mean(self) -> float:
        return self.value

    @property
    def support(self) -> tuple[float, float]:
        return (self.value, self.value)


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def quantile(self, p):
        return self.a + np.asarray(p, dtype=float) * (self.b - self.a)

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        return gen.uniform(self.a, self.b, n)

    @property
    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)


def slope_map(u):
    """``g(u) = ((1 - u) / (1 + u))^2``, strictly decreasing on (-1, 1]."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return ((1.0 - u) / (1.0 + u)) ** 2


def slope_map_inverse(v):
    s = np.sqrt(np.asarray(v, dtype=float))
    return (1.0 - s) / (1.0 + s)


@dataclass(frozen=True)
class SlopePushforward:
    """Law of ``g(U)`` for ``U`` uniform on ``[a, b]``."""

    a: float
    b: float

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(invalid="ignore"):
            u = slope_map_inverse(np.maximum(v, 0.0))
            return np.where(v < 0, 0.0, np.clip((self.b - u) / (self.b - self.a), 0.0, 1.0))

    def quantile(self, p):
        return slope_map(self.a + (1.0 - np.asarray(p, dtype=float)) * (self.b - self.a))

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        return slope_map(gen.uniform(self.a, self.b, n))

    @property
    def support(self) -> tuple[float, float]:
        return (float(slope_map(self.b)), float(slope_map(self.a)))


def inclination_law(params: Params):
    """Law of the asymptotic slope ``tan(alpha)`` of the competition interface."""
    lam, rho = params.lam, params.rho
    if rho >= lam:
        return PointMass(lam * rho / ((1.0 - lam) * (1.0 - rho)))
    return SlopePushforward(1.0 - 2 * lam, 1.0 - 2 * rho)


def second_class_speed_law(params: Params):
    lam, rho = params.lam, params.rho
    if lam <= rho:
        return PointMass(1.0 - lam - rho)
    return Uniform(1.0 - 2 * lam, 1.0 - 2 * rho)


def psi_point(u):
    """Where the competition interface sits at time 1 when the speed is ``u``."""
    u = np.asarray(u, dtype=float)
    return np.stack([(1.0 + u) ** 2 / 4.0, (1.0 - u) ** 2 / 4.0], axis=-1)


@dataclass(frozen=True)
class PsiLimitLaw:
    """Limit of ``psi(t) / t``: a point for ``lam <= rho``, otherwise the image of
    the uniform speed under :func:`psi_point`."""

    params: Params

    @property
    def deterministic(self) -> bool:
        return self.params.lam <= self.params.rho

    @property
    def point(self) -> tuple[float, float]:
        if not self.deterministic:
            raise ValueError("the limit is random in the rarefaction regime")
        lam, rho = self.params.lam, self.params.rho
        return ((1.0 - rho) * (1.0 - lam), lam * rho)

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        if self.deterministic:
            return np.tile(self.point, (n, 1))
        return psi_point(second_class_speed_law(self.params).sample(n, gen))


def psi_limit_law(params: Params) -> PsiLimitLaw:
    return PsiLimitLaw(params)


# -- limit shape ------------------------------------------------------------

@dataclass(frozen=True)
class LimitShape:
    """Rescaled growth interface ``r -> (x(r), y(r))`` with ``x - y = r``,
    ``dx/dr = 1 - u(r, 1)`` and ``dy/dr = -u(r, 1)``."""

    params: Params

    @property
    def curved(self) -> bool:
        return self.params.lam > self.params.rho

    @property
    def anchor(self) -> tuple[float, float, float]:
        """``(r, x, y)`` of the point the shape is pinned at."""
        lam, rho = self.params.lam, self.params.rho
        if self.curved:
            r = 1.0 - self.params.lam - self.params.rho  # fan midpoint
            return (r, (1.0 + r) ** 2 / 4.0, (1.0 - r) ** 2 / 4.0)
        x, y = (1.0 - rho) * (1.0 - lam), lam * rho
        return (x - y, x, y)

    @property
    def fan(self) -> tuple[float, float] | None:
        if not self.curved:
            return None
        return (1.0 - 2 * self.params.lam, 1.0 - 2 * self.params.rho)

    def u(self, r):
        return burgers_u(self.params, r, 1.0)

    def point(self, r) -> np.ndarray:
        """Shape points for an array of ``r``; shape ``(..., 2)``."""
        lam, rho = self.params.lam, self.params.rho
        r = np.asarray(r, dtype=float)
        if self.curved:
            lo, hi = self.fan
            rc = np.clip(r, lo, hi)
            base = psi_point(rc)
            left = np.minimum(r - lo, 0.0)
            right = np.maximum(r - hi, 0.0)
            x = base[..., 0] + left * (1.0 - lam) + right * (1.0 - rho)
            y = base[..., 1] - left * lam - right * rho
            return np.stack([x, y], axis=-1)
        rs, xs, ys = self.anchor
        d = r - rs
        left = np.minimum(d, 0.0)
        right = np.maximum(d, 0.0)
        return np.stack([xs + left * (1.0 - lam) + right * (1.0 - rho), ys - left * lam - right * rho], axis=-1)

    def integrated_point(self, r: float) -> tuple[float, float]:
        """The same point obtained by integrating the slope law from the anchor."""
        rs, xs, ys = self.anchor
        breaks = [b for b in (1.0 - 2 * self.params.lam, 1.0 - 2 * self.params.rho, rs) if min(r, rs) < b < max(r, rs)]
        ix, _ = integrate.quad(lambda q: 1.0 - self.u(q), rs, r, points=breaks or None, epsabs=1e-13, epsrel=1e-13)
        iy, _ = integrate.quad(lambda q: self.u(q), rs, r, points=breaks or None, epsabs=1e-13, epsrel=1e-13)
        return xs + ix, ys - iy

    def deviation(self, profile_points: np.ndarray, t: float, r_range=(-1.0, 1.0)) -> float:
        """Largest distance between ``points / t`` and the shape point with the
        same ``r = (x - y) / t``, over points whose ``r`` lies in ``r_range``."""
        pts = np.asarray(profile_points, dtype=float) / t
        r = pts[:, 0] - pts[:, 1]
        keep = (r >= r_range[0]) & (r <= r_range[1])
        if not np.any(keep):
            raise ValueError("no points in the requested range")
        diff = pts[keep] - self.point(r[keep])
        return float(np.max(np.hypot(diff[:, 0], diff[:, 1])))


def limit_shape(params: Params) -> LimitShape:
    return LimitShape(params)


def regime_summary(params: Params) -> dict:
    """Plain-data summary used by the command line."""
    out = {
        "lambda": params.lam,
        "rho": params.rho,
        "theta": params.theta,
        "regime": params.regime.value,
    }
    if params.regime is Regime.RAREFACTION:
        out["fan"] = list(characteristic(params, 0.0, 1.0))
    else:
        out["shock_speed"] = shock_speed(params)
    law = inclination_law(params)
    if isinstance(law, PointMass):
        out["tan_alpha"] = law.value
        out["alpha_degrees"] = math.degrees(math.atan(law.value))
    else:
        qs = [0.01, 0.25, 0.5, 0.75, 0.99]
        out["tan_alpha_quantiles"] = {f"{q:g}": float(law.quantile(q)) for q in qs}
    return out
