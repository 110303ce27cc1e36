"""Differential geometry of sampled space curves and of the Bloch hodograph."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .dynamics import FieldParams
from .elliptic import jacobi_sncndn
from .errors import DegenerateVector, InvalidGrid, NotApplicable, NotClosed

TORSION_RTOL = 1e-10


class SphericalAngles(NamedTuple):
    theta: np.ndarray
    phi: np.ndarray


def to_spherical(R) -> SphericalAngles:
    """Polar angle theta in [0, pi] and azimuth phi in [0, 2 pi) of ``R``.

    theta = 0 is the north pole; at the poles phi is 0 by convention.
    """
    R = np.asarray(R, dtype=float)
    norm = np.linalg.norm(R, axis=-1)
    if np.any(norm <= 1e-12):
        raise DegenerateVector("spherical angles undefined for a (near) zero vector")
    theta = np.arccos(np.clip(R[..., 2] / norm, -1.0, 1.0))
    phi = np.mod(np.arctan2(R[..., 1], R[..., 0]), 2 * np.pi)
    phi = np.where(phi >= 2 * np.pi, 0.0, phi)
    return SphericalAngles(theta, phi)


def resonance_rates(t, p: FieldParams):
    """Nutation and precession rates at resonance.

    theta' = h sgn(sin ht) and phi' = omega dn(omega t|k) (which is omega for
    k = 0). sgn(0) = 0 at the turning instants.
    """
    if not p.is_resonant():
        raise NotApplicable("angular rates are only given in closed form at resonance")
    t = np.asarray(t, dtype=float)
    h = p.h
    _, _, dn = jacobi_sncndn(p.omega * t, p.k)
    return h * np.sign(np.sin(h * t)), p.omega * dn


@dataclass(frozen=True, eq=False)
class Curve3D:
    """Space curve sampled on a strictly increasing time grid."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        points = np.asarray(self.points, dtype=float)
        if times.ndim != 1 or points.shape != (len(times), 3):
            raise InvalidGrid(f"need times (n,) and points (n, 3), got {times.shape}, {points.shape}")
        if len(times) < 5:
            raise InvalidGrid("a curve needs at least 5 samples")
        if np.any(np.diff(times) <= 0):
            raise InvalidGrid("time grid must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @property
    def step(self) -> float:
        dt = np.diff(self.times)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise InvalidGrid("finite differences need a uniform grid")
        return float(dt.mean())

    def gap(self) -> float:
        """Distance between the first and last point."""
        return float(np.linalg.norm(self.points[-1] - self.points[0]))


@lru_cache(maxsize=None)
def _weights(offsets: tuple, order: int) -> np.ndarray:
    # solve sum_j w_j x_j^p / p! = delta(p, order) for p < len(offsets)
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    A = np.vander(x, n, increasing=True).T / np.array([math.factorial(p) for p in range(n)])[:, None]
    rhs = np.zeros(n)
    rhs[order] = 1.0
    return np.linalg.solve(A, rhs)


def derivative(values, dt: float, order: int = 1) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0 of a uniform grid.

    Centered stencils in the interior; near the ends the stencil is shifted
    inward and widened by one point so the order is kept.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    central = 5 if order < 3 else 7
    edge = order + 4
    central = min(central, n if n % 2 else n - 1)
    edge = min(edge, n)
    half = central // 2
    out = np.empty_like(values)

    w = _weights(tuple(range(-half, half + 1)), order)
    interior = slice(half, n - half)
    acc = np.zeros_like(values[interior])
    for j, o in enumerate(range(-half, half + 1)):
        acc += w[j] * values[half + o: n - half + o]
    out[interior] = acc

    for i in list(range(half)) + list(range(n - half, n)):
        start = 0 if i < half else n - edge
        offsets = tuple(range(start - i, start - i + edge))
        w_edge = _weights(offsets, order)
        out[i] = np.tensordot(w_edge, values[start:start + edge], axes=1)
    return out / dt ** order


@dataclass(frozen=True, eq=False)
class FrenetData:
    """Speed V, curvature, torsion and arc length along a curve.

    ``torsion`` is NaN where the osculating plane is undefined
    (``torsion_defined`` False).
    """

    times: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray
    torsion: np.ndarray
    arclength: np.ndarray
    torsion_defined: np.ndarray

    def torsion_sign(self) -> np.ndarray:
        """Sign of the torsion with undefined samples filled from the nearest valid one."""
        sign = np.sign(self.torsion)
        valid = np.flatnonzero(self.torsion_defined)
        if valid.size == 0:
            return np.zeros_like(sign)
        idx = np.arange(len(sign))
        pos = np.searchsorted(valid, idx)
        right = valid[np.minimum(pos, valid.size - 1)]
        left = valid[np.maximum(pos - 1, 0)]
        nearest = np.where(idx - left < right - idx, left, right)
        return sign[nearest]


def frenet_analyze(c: Curve3D) -> FrenetData:
    dt = c.step
    d1 = derivative(c.points, dt, 1)
    d2 = derivative(c.points, dt, 2)
    d3 = derivative(c.points, dt, 3)
    speed = np.linalg.norm(d1, axis=1)
    cross = np.cross(d1, d2)
    cross2 = np.einsum("ij,ij->i", cross, cross)
    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = np.sqrt(cross2) / speed ** 3
        defined = cross2 >= TORSION_RTOL * speed ** 6
        torsion = np.where(defined, np.einsum("ij,ij->i", cross, d3) / cross2, np.nan)
    arclength = cumulative_trapezoid(speed, c.times, initial=0.0)
    return FrenetData(c.times, speed, curvature, torsion, arclength, defined)


def arc_length(c: Curve3D) -> float:
    return float(frenet_analyze(c).arclength[-1])


def circulation(c: Curve3D, closure_tol: float = 1e-8) -> float:
    """Contour integral of R' . dR, i.e. the time integral of |R'|^2.

    The curve must close, |r(T) - r(0)| <= ``closure_tol``.
    """
    if c.gap() > closure_tol:
        raise NotClosed(f"curve endpoints differ by {c.gap():.3e}")
    d1 = derivative(c.points, c.step, 1)
    return float(trapezoid(np.einsum("ij,ij->i", d1, d1), c.times))


def closure_period(p: FieldParams, max_int: int = 10_000,
                   tol: float = 1e-9) -> Optional[tuple[float, int, int]]:
    """Smallest T_c = 2 pi m / h = pi l / omega with integers m, l <= ``max_int``.

    Returns ``(T_c, m, l)``, or None when h / (2 omega) has no rational
    approximation with small terms within ``tol``.
    """
    if not (p.is_resonant() and p.k == 0.0):
        raise NotApplicable("closure period is defined for the k = 0 resonance")
    ratio = p.h / (2.0 * p.omega)
    if ratio <= 0:
        return None
    frac = Fraction(ratio).limit_denominator(max_int)
    m, l = frac.numerator, frac.denominator
    if m > max_int or abs(m / l - ratio) > tol * max(1.0, ratio):
        return None
    return 2 * math.pi * m / p.h, m, l


def sign_changes(values) -> np.ndarray:
    """Indices i where ``values`` changes sign between samples i and i+1.

    A sample that is exactly zero counts once, at its own index.
    """
    s = np.sign(np.asarray(values, dtype=float))
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    zeros = np.flatnonzero(s[1:-1] == 0) + 1
    return np.union1d(idx, zeros)


def local_minima(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])) + 1


def local_maxima(values) -> np.ndarray:
    return local_minima(-np.asarray(values, dtype=float))


def local_extrema(values) -> np.ndarray:
    return np.union1d(local_minima(values), local_maxima(values))


def event_offsets(reference, candidates) -> np.ndarray:
    """Grid distance from each reference event to the nearest candidate event."""
    reference = np.asarray(reference)
    candidates = np.asarray(candidates)
    if candidates.size == 0:
        return np.full(reference.shape, np.inf)
    return np.min(np.abs(reference[:, None] - candidates[None, :]), axis=1).astype(float)


def events_aligned(reference, candidates, window: int = 2) -> bool:
    """True when every reference event has a candidate within ``window`` steps."""
    return bool(np.all(event_offsets(reference, candidates) <= window))
