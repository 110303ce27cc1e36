"""Jacobi elliptic functions and elliptic integrals.

Conventions: the Jacobi functions and ``complete_K`` take the modulus ``k``
(parameter ``m = k**2``), while ``incomplete_E`` and ``complete_E`` take the
parameter ``m`` directly, which may be any value ``m <= 1`` (negative values
appear as ``m = -H**2 / h**2`` in the speed-limit bounds).

sn, cn, dn use the arithmetic-geometric mean with descending Landen
transformations (DLMF 22.20(ii)); E uses Carlson's symmetric integrals
R_F and R_D (DLMF 19.25.9, 19.36).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentInput

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus ``k`` in [0, 1] stored with its parameter ``m = k**2``."""

    k: float

    def __post_init__(self):
        k = float(self.k)
        if not (0.0 <= k <= 1.0):
            raise ValueError(f"elliptic modulus must lie in [0, 1], got {k!r}")
        object.__setattr__(self, "k", k)

    @property
    def m(self) -> float:
        return self.k * self.k

    @property
    def complementary(self) -> float:
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))


def _modulus(k) -> float:
    if isinstance(k, EllipticModulus):
        return k.k
    return EllipticModulus(k).k


def _parameter(m) -> float:
    m = float(m)
    if not m <= 1.0:
        raise ValueError(f"elliptic parameter must satisfy m <= 1, got {m!r}")
    return m


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two non-negative numbers."""
    while abs(a - b) > 2 * _EPS * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k) -> float:
    """Complete elliptic integral of the first kind K(k), modulus convention."""
    k = _modulus(k)
    if k == 1.0:
        raise DivergentInput("K(k) diverges at k = 1")
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    return math.pi / (2.0 * agm(1.0, kp))


def jacobi_sncndn(u, k):
    """Return ``(sn, cn, dn)`` of ``u`` for modulus ``k``.

    ``u`` may be a scalar or an array; ``k`` is a scalar. The argument is
    first reduced modulo the real period 4K, so accuracy does not degrade
    with ``|u|`` beyond the rounding of the reduction itself.
    """
    k = _modulus(k)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if k == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech.copy()

    kp = math.sqrt((1.0 - k) * (1.0 + k))
    period = 4.0 * complete_K(k)
    u = u - period * np.round(u / period)

    a, b, c = 1.0, kp, k
    ratios = []
    while abs(c) > _EPS:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        ratios.append(c / a)
    phi = (2.0 ** len(ratios)) * a * u
    for ratio in reversed(ratios):
        phi = 0.5 * (phi + np.arcsin(ratio * np.sin(phi)))

    sn = np.sin(phi)
    cn = np.cos(phi)
    # sum of non-negative terms: no cancellation near the quarter period
    dn = np.sqrt(kp * kp + k * k * cn * cn)
    return sn, cn, dn


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_F(x, y, z); at most one argument zero."""
    x, y, z = float(x), float(y), float(z)
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise ValueError("R_F needs non-negative arguments with at most one zero")
    x0, y0 = x, y
    a0 = (x + y + z) / 3.0
    q = max(abs(a0 - x), abs(a0 - y), abs(a0 - z)) / 1e-3
    a = a0
    scale = 1.0
    while scale * q > abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    X = scale * (a0 - x0) / a
    Y = scale * (a0 - y0) / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    series = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
              - 5.0 * e2 ** 3 / 208.0 + 3.0 * e3 * e3 / 104.0 + e2 * e2 * e3 / 16.0)
    return series / math.sqrt(a)


def carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_D(x, y, z) = R_J(x, y, z, z); z > 0."""
    x, y, z = float(x), float(y), float(z)
    if min(x, y) < 0.0 or z <= 0.0 or (x == 0.0 and y == 0.0):
        raise ValueError("R_D needs x, y >= 0 (not both zero) and z > 0")
    x0, y0 = x, y
    a0 = (x + y + 3.0 * z) / 5.0
    q = max(abs(a0 - x), abs(a0 - y), abs(a0 - z)) / 1e-3
    a = a0
    scale = 1.0
    tail = 0.0
    while scale * q > abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        tail += scale / (sz * (z + lam))
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    X = scale * (a0 - x0) / a
    Y = scale * (a0 - y0) / a
    Z = -(X + Y) / 3.0
    xy = X * Y
    z2 = Z * Z
    e2 = xy - 6.0 * z2
    e3 = (3.0 * xy - 8.0 * z2) * Z
    e4 = 3.0 * (xy - z2) * z2
    e5 = xy * z2 * Z
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
              - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return scale * series / (a * math.sqrt(a)) + 3.0 * tail


def complete_E(m) -> float:
    """Complete elliptic integral of the second kind E(m), parameter convention."""
    m = _parameter(m)
    if m == 1.0:
        return 1.0
    y = 1.0 - m
    return carlson_rf(0.0, y, 1.0) - m * carlson_rd(0.0, y, 1.0) / 3.0


def _incomplete_E_scalar(phi: float, m: float) -> float:
    turns = round(phi / math.pi)
    rest = phi - turns * math.pi
    s = math.sin(rest)
    if m == 1.0:
        return 2.0 * turns + s
    value = 0.0
    if s != 0.0:
        c2 = math.cos(rest) ** 2
        y = 1.0 - m * s * s
        value = s * carlson_rf(c2, y, 1.0) - m * s ** 3 * carlson_rd(c2, y, 1.0) / 3.0
    if turns:
        value += 2.0 * turns * complete_E(m)
    return value


def incomplete_E(phi, m):
    """Incomplete elliptic integral of the second kind.

    E(phi|m) = integral from 0 to phi of sqrt(1 - m sin^2 v) dv, for any real
    ``phi`` and ``m <= 1``. Arrays of ``phi`` are accepted; ``m`` is scalar.
    """
    m = _parameter(m)
    if np.ndim(phi) == 0:
        return _incomplete_E_scalar(float(phi), m)
    phi = np.asarray(phi, dtype=float)
    out = np.empty_like(phi)
    for idx, value in np.ndenumerate(phi):
        out[idx] = _incomplete_E_scalar(float(value), m)
    return out
