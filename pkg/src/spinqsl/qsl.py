"""Quantum-speed-limit quantities for the resonantly driven spin.

Energy variance along a trajectory, hodograph length, the speed
normalization p, pole-to-pole distance, Mandelstam-Tamm style averaged
bounds and the closed-form bound times with their h -> 0 limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad, trapezoid

from .dynamics import Trajectory
from .elliptic import complete_E, incomplete_E, jacobi_sncndn
from .errors import (BoundViolation, DimensionMismatch, InsufficientCoverage, NotApplicable,
                     NotPureState)
from .geometry import Curve3D, derivative
from .spin_algebra import as_spin, bloch_radius, coherence_vector, make_spin_system
from .uncertainty import clamp_variance

BOUND_SLACK = 1e-9


def energy_variance(rho, Hmat) -> np.ndarray:
    """Tr(rho (H - <H>)^2), for single matrices or matching stacks."""
    rho = np.asarray(rho)
    Hmat = np.asarray(Hmat)
    if rho.shape[-2:] != Hmat.shape[-2:]:
        raise DimensionMismatch(f"rho {rho.shape} and H {Hmat.shape} differ in dimension")
    mean = np.einsum("...ij,...ji->...", rho, Hmat).real
    # centered form: rounding in rho enters at second order near eigenstates
    shifted = Hmat - mean[..., None, None] * np.eye(Hmat.shape[-1])
    return clamp_variance(np.einsum("...ij,...jk,...ki->...", rho, shifted, shifted).real)


@dataclass(frozen=True, eq=False)
class EnergyStats:
    times: np.ndarray
    variance: np.ndarray

    @property
    def std_dev(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def integral(self, tau: float) -> float:
        """Trapezoidal integral of the standard deviation over [t0, t0 + tau]."""
        return _integrate_upto(self.times, self.std_dev, tau)

    def time_average(self, tau: float) -> float:
        return self.integral(tau) / tau


def _integrate_upto(times, values, tau):
    t0 = times[0]
    end = t0 + tau
    if times[-1] < end - 1e-12 * max(1.0, abs(end)):
        raise InsufficientCoverage(f"trajectory ends at {times[-1]}, needs {end}")
    inside = times <= end
    t = times[inside]
    v = values[inside]
    if t[-1] < end:
        j = np.count_nonzero(inside)
        frac = (end - times[j - 1]) / (times[j] - times[j - 1])
        t = np.append(t, end)
        v = np.append(v, values[j - 1] + frac * (values[j] - values[j - 1]))
    return float(trapezoid(v, t))


def energy_stats(traj: Trajectory) -> EnergyStats:
    return EnergyStats(traj.times, energy_variance(traj.states, traj.hamiltonians()))


def p_factor(S) -> float:
    """Speed normalization 3 / (2 (S + 1)) linking apex speed and energy spread."""
    return 1.5 / (as_spin(S) + 1.0)


def geodesic_p(S, r_b: float) -> float:
    """Speed normalization for equatorial precession, 3 r_b^2 / (4 S (S + 1))."""
    S = as_spin(S)
    if r_b <= 0:
        raise ValueError("r_b must be positive")
    return 3.0 * r_b ** 2 / (4.0 * S * (S + 1.0))


def geodesic_initial_state(S) -> np.ndarray:
    """Pure state with equal populations and real amplitudes (doubly stochastic rho)."""
    sys = make_spin_system(S)
    return np.full((sys.d, sys.d), 1.0 / sys.d, dtype=complex)


def geodesic_radius(S) -> float:
    """Coherence-vector length of ``geodesic_initial_state``."""
    sys = make_spin_system(S)
    return float(np.linalg.norm(coherence_vector(geodesic_initial_state(S), sys)))


def geodesic_model(S, eta: float, r_b: float, t) -> np.ndarray:
    """Equatorial precession r_b (cos eta t, sin eta t, 0) under eta C3."""
    as_spin(S)
    if eta <= 0:
        raise ValueError("eta must be positive")
    t = np.asarray(t, dtype=float)
    return r_b * np.stack([np.cos(eta * t), np.sin(eta * t), np.zeros_like(t)], axis=-1)


def apex_speed(traj: Trajectory) -> np.ndarray:
    """r_B |p'| with p the unit polarization vector; 4th-order differences."""
    R = traj.coherence
    unit = R / np.linalg.norm(R, axis=-1, keepdims=True)
    dt = Curve3D(traj.times, unit).step
    return traj.system.r_B * np.linalg.norm(derivative(unit, dt, 1), axis=-1)


def hodograph_length(traj: Trajectory, p: Optional[float] = None) -> tuple[float, float]:
    """Return (s, l): the energy-spread length and the length on the sphere.

    s = integral of sqrt(4 p) Delta E dt; l = integral of r_B |p'| dt.
    """
    purity = np.einsum("ij,ji->", traj.states[0], traj.states[0]).real
    if purity < 1.0 - 1e-10:
        raise NotPureState(f"initial purity {purity:.12f} < 1")
    if p is None:
        p = p_factor(traj.system.S)
    stats = energy_stats(traj)
    s = math.sqrt(4.0 * p) * float(trapezoid(stats.std_dev, traj.times))
    R = traj.coherence
    if np.ptp(R, axis=0).max() == 0.0:
        return s, 0.0
    l = float(trapezoid(apex_speed(traj), traj.times))
    return s, l


def pole_distance(h: float, H: float, k: float, S) -> float:
    """Length r_B int_0^{pi/h} sqrt(h^2 + H^2 sin^2(ht) dn^2(Ht|k)) dt.

    Resonant drive omega = H; valid where the resonance closed form holds.
    """
    S = as_spin(S)
    if not (k == 0.0 or S in (0.5, 1.0)):
        raise NotApplicable("pole distance needs k = 0 or S in {1/2, 1}")

    def speed(t):
        _, _, dn = jacobi_sncndn(H * t, k)
        return math.sqrt(h * h + (H * math.sin(h * t) * float(dn)) ** 2)

    value, _ = quad(speed, 0.0, math.pi / h, epsabs=0.0, epsrel=1e-12, limit=200)
    return bloch_radius(S) * value


def nearest_integer(x: float) -> int:
    """Closest integer, ties to even (so 1/2 -> 0)."""
    return int(round(x))


def tau_qsl(S, h: float, H: float) -> float:
    """pi^2 sqrt(S) / (sqrt(2) h E(-H^2/h^2))."""
    S = as_spin(S)
    return math.pi ** 2 * math.sqrt(S) / (math.sqrt(2.0) * h * complete_E(-(H / h) ** 2))


def tau1_qsl(S, h: float, H: float) -> float:
    """pi^2 / (2 h (2S)^{3/2} E(pi/(2S) | -H^2/h^2))."""
    S = as_spin(S)
    E = incomplete_E(math.pi / (2.0 * S), -(H / h) ** 2)
    return math.pi ** 2 / (2.0 * h * (2.0 * S) ** 1.5 * E)


def tau_qsl_limit(S, H: float) -> float:
    """h -> 0 value of ``tau_qsl``: pi^2 sqrt(S) / (sqrt(2) H)."""
    return math.pi ** 2 * math.sqrt(as_spin(S)) / (math.sqrt(2.0) * H)


def tau1_qsl_limit(S, H: float) -> float:
    """Closed form pi^2 / (H (2S)^{3/2} ((-1)^r (1 - |cos(pi/2S)|) + 2r)), r = r[1/(2S)]."""
    S = as_spin(S)
    r = nearest_integer(1.0 / (2.0 * S))
    bracket = (-1) ** r * (1.0 - abs(math.cos(math.pi / (2.0 * S)))) + 2 * r
    return math.pi ** 2 / (H * (2.0 * S) ** 1.5 * bracket)


def qsl_ratio_limit(S) -> float:
    """Limit ratio tau_qsl / tau1_qsl as h -> 0 (independent of H)."""
    return tau_qsl_limit(S, 1.0) / tau1_qsl_limit(S, 1.0)


@dataclass(frozen=True)
class QslReport:
    S: float
    h: float
    H: float
    tau: float
    tau1: float
    tau_qsl: float
    tau1_qsl: float
    mt_product: Optional[float]
    mt1_product: Optional[float]
    mt_margin: Optional[float]
    mt1_margin: Optional[float]
    p_factor: float
    bound_enforced: bool

    @property
    def tau_margin(self) -> float:
        return self.tau - self.tau_qsl

    @property
    def tau1_margin(self) -> float:
        return self.tau1 - self.tau1_qsl


def mt_bound(S) -> float:
    """sqrt(S/2) pi: lower bound on the integrated energy spread, pole to pole."""
    return math.sqrt(as_spin(S) / 2.0) * math.pi


def mt1_bound(S) -> float:
    """pi / (2 sqrt(2S)): the same up to the first orthogonal state."""
    return math.pi / (2.0 * math.sqrt(2.0 * as_spin(S)))


def mt_check(traj: Trajectory, which: str = "full", tau: Optional[float] = None) -> QslReport:
    """Time-averaged energy spread against the Mandelstam-Tamm type bounds.

    ``which`` is "full" (tau = pi/h, pole to pole) or "first_orthogonal"
    (tau1 = pi/(2Sh)); ``tau`` overrides the corresponding interval. The
    other interval is evaluated too when the trajectory covers it. On
    dynamics where the resonance closed form holds a margin below
    -1e-9 raises ``BoundViolation``; elsewhere margins are only reported.
    """
    if which not in ("full", "first_orthogonal"):
        raise ValueError(f"unknown interval {which!r}")
    p = traj.params
    S = traj.system.S
    h, H = p.h, p.H
    tau_full = math.pi / h
    tau_first = math.pi / (2.0 * S * h)
    if which == "full" and tau is not None:
        tau_full = tau
    if which == "first_orthogonal" and tau is not None:
        tau_first = tau
    stats = energy_stats(traj)
    span = traj.times[-1] - traj.times[0]

    def product(interval, required):
        if required or span >= interval * (1 - 1e-12):
            return stats.integral(interval)
        return None

    prod = product(tau_full, which == "full")
    prod1 = product(tau_first, which == "first_orthogonal")
    margin = None if prod is None else prod - mt_bound(S)
    margin1 = None if prod1 is None else prod1 - mt1_bound(S)
    enforced = traj.closed_form_valid()
    if enforced:
        for name, value in (("full", margin), ("first_orthogonal", margin1)):
            if value is not None and value < -BOUND_SLACK:
                raise BoundViolation(f"{name} margin {value:.3e} below bound")
    return QslReport(S=S, h=h, H=H, tau=tau_full, tau1=tau_first,
                     tau_qsl=tau_qsl(S, h, H), tau1_qsl=tau1_qsl(S, h, H),
                     mt_product=prod, mt1_product=prod1, mt_margin=margin, mt1_margin=margin1,
                     p_factor=p_factor(S), bound_enforced=enforced)
