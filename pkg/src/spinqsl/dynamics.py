"""Driving field, Hamiltonian and propagators for a spin in an elliptic field.

The field is h(t) = (h1 cn(wt|k), h2 sn(wt|k), H dn(wt|k)) in frequency
units, with the magnetic moment and hbar set to one, so the Hamiltonian is
simply h_i(t) C_i.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import EllipticModulus, complete_K, jacobi_sncndn
from .errors import InvalidGrid, NotApplicable
from .spin_algebra import SpinSystem, coherence_vector

RESONANCE_RTOL = 1e-12
REUNITARIZE_EVERY = 256


@dataclass(frozen=True)
class FieldParams:
    """Amplitudes (h1, h2, H), frequency ``omega`` and elliptic modulus ``k``."""

    h1: float
    h2: float
    H: float
    omega: float
    k: float = 0.0

    def __post_init__(self):
        for name in ("h1", "h2", "H", "omega", "k"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if min(self.h1, self.h2, self.H) < 0:
            raise ValueError("field amplitudes h1, h2, H must be non-negative")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        EllipticModulus(self.k)

    @classmethod
    def resonant_field(cls, h: float, H: float, k: float = 0.0) -> "FieldParams":
        """Consistent field (h1 = h2 = h) driven at resonance, omega = H."""
        return cls(h1=h, h2=h, H=H, omega=H, k=k)

    @property
    def delta(self) -> float:
        """Detuning H - omega."""
        return self.H - self.omega

    def is_consistent(self) -> bool:
        return self.h1 == self.h2

    def is_resonant(self) -> bool:
        return abs(self.delta) <= RESONANCE_RTOL * max(1.0, self.omega)

    @property
    def h(self) -> float:
        """Common transverse amplitude of a consistent field."""
        if not self.is_consistent():
            raise NotApplicable(f"h1 = {self.h1} differs from h2 = {self.h2}")
        return self.h1

    def max_rate(self) -> float:
        return max(self.h1, self.h2, self.H, self.omega)


def closed_form_valid(p: FieldParams, S: float) -> bool:
    """Whether the resonance closed form for the spin vector is asserted.

    Requires a consistent field at resonance, and either k = 0 or S <= 1.
    """
    return p.is_consistent() and p.is_resonant() and (p.k == 0.0 or S in (0.5, 1.0))


def field_at(t, p: FieldParams) -> np.ndarray:
    """Field vector(s) at time(s) ``t``; shape ``np.shape(t) + (3,)``."""
    sn, cn, dn = jacobi_sncndn(np.multiply(p.omega, t), p.k)
    return np.stack([p.h1 * cn, p.h2 * sn, p.H * dn], axis=-1)


def hamiltonian_at(t, p: FieldParams, sys: SpinSystem) -> np.ndarray:
    b = field_at(t, p)
    ops = np.stack(sys.C)
    return np.einsum("...i,ijk->...jk", b, ops)


def default_steps(p: FieldParams, duration: float) -> int:
    """About 100 steps per unit of the fastest rate in the field."""
    return max(1, math.ceil(100.0 * abs(duration) * p.max_rate()))


def _exp_hermitian(Hm, dt):
    # exp(-i dt Hm) for a stack of Hermitian matrices, via eigendecomposition
    w, V = np.linalg.eigh(Hm)
    return (V * np.exp(-1j * dt * w)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _nearest_unitary(U):
    # polar factor; removes the slow loss of unitarity from rounding in long products
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


def step_propagators(p: FieldParams, sys: SpinSystem, t_start: float, t_end: float,
                     n_steps: int) -> np.ndarray:
    """Midpoint one-step propagators exp(-i dt H(t_j + dt/2)), shape (n, d, d)."""
    dt = (t_end - t_start) / n_steps
    mids = t_start + (np.arange(n_steps) + 0.5) * dt
    return _exp_hermitian(hamiltonian_at(mids, p, sys), dt)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled density matrices rho(t) with the coherence vector along them."""

    times: np.ndarray
    states: np.ndarray
    params: FieldParams
    system: SpinSystem
    coherence: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coherence", coherence_vector(self.states, self.system))

    def __len__(self):
        return len(self.times)

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    def purity(self) -> np.ndarray:
        return np.einsum("nij,nji->n", self.states, self.states).real

    def hamiltonians(self) -> np.ndarray:
        return hamiltonian_at(self.times, self.params, self.system)

    def starts_from_highest_weight(self, atol: float = 1e-12) -> bool:
        return np.allclose(self.states[0], self.system.highest_weight_state(), atol=atol)

    def closed_form_valid(self) -> bool:
        return closed_form_valid(self.params, self.system.S) and self.starts_from_highest_weight()


def propagate_numeric(rho0, p: FieldParams, sys: SpinSystem, t_end: float,
                      n_steps: int | None = None, *, t_start: float = 0.0,
                      sample_every: int = 1, chunk: int = 4096) -> Trajectory:
    """Integrate d(rho)/dt = -i[H(t), rho] with the exponential midpoint rule.

    Every step multiplies by exp(-i dt H(t_mid)), which is unitary to
    rounding, so purity and the spectrum of rho are preserved exactly; the
    global error is second order in dt. ``t_end < t_start`` integrates
    backwards in time. States are kept every ``sample_every`` steps (the
    final time is always kept).
    """
    rho0 = sys.check_state(rho0)
    if not (math.isfinite(t_end) and math.isfinite(t_start)) or t_end == t_start:
        raise InvalidGrid("need finite t_start != t_end")
    if n_steps is None:
        n_steps = default_steps(p, t_end - t_start)
    n_steps = int(n_steps)
    if n_steps < 1 or sample_every < 1:
        raise InvalidGrid("n_steps and sample_every must be at least 1")
    dt = (t_end - t_start) / n_steps

    keep = list(range(0, n_steps + 1, sample_every))
    if keep[-1] != n_steps:
        keep.append(n_steps)
    keep_set = set(keep)

    U = np.eye(sys.d, dtype=complex)
    saved = [U.copy()]
    for lo in range(0, n_steps, chunk):
        hi = min(n_steps, lo + chunk)
        mids = t_start + (np.arange(lo, hi) + 0.5) * dt
        steps = _exp_hermitian(hamiltonian_at(mids, p, sys), dt)
        for j, u in enumerate(steps, start=lo + 1):
            U = u @ U
            if j % REUNITARIZE_EVERY == 0:
                U = _nearest_unitary(U)
            if j in keep_set:
                saved.append(U)
    Us = np.stack(saved)
    states = Us @ rho0 @ np.conj(np.swapaxes(Us, -1, -2))
    times = t_start + np.asarray(keep, dtype=float) * dt
    times[-1] = t_end
    return Trajectory(times=times, states=states, params=p, system=sys)


def analytic_resonance_spin(t, p: FieldParams, sys: SpinSystem) -> np.ndarray:
    """Closed-form coherence vector at resonance, starting from |S, S>.

    R(t) = r_B (sn(wt|k) sin ht, -cn(wt|k) sin ht, cos ht).
    """
    if not closed_form_valid(p, sys.S):
        raise NotApplicable(
            "closed form needs a consistent resonant field and k = 0 or S in {1/2, 1}")
    t = np.asarray(t, dtype=float)
    sn, cn, _ = jacobi_sncndn(p.omega * t, p.k)
    ht = p.h * t
    return sys.r_B * np.stack([sn * np.sin(ht), -cn * np.sin(ht), np.cos(ht)], axis=-1)


class Validity(enum.Enum):
    EXACT = "Exact"
    NOT_APPLICABLE = "NotApplicable"


ALPHA_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AlphaPropagator:
    """Diagonal gauge transform alpha(t) and the transformed Hamiltonian.

    alpha(t) = diag(f(S), f(S-1), ..., f(-S)) with f(m) = cn(m w t|k) +
    i sn(m w t|k). When the transformed Hamiltonian
    alpha H alpha^-1 - i alpha d(alpha^-1)/dt is constant (``EXACT``), the
    evolution is U(t) = alpha(t)^-1 exp(-i t h0).
    """

    params: FieldParams
    system: SpinSystem
    h0: np.ndarray
    validity: Validity
    max_deviation: float

    @property
    def _m(self):
        return np.real(np.diag(self.system.C[2]))

    def alpha(self, t) -> np.ndarray:
        sn, cn, _ = jacobi_sncndn(np.multiply.outer(np.asarray(t, float), self._m * self.params.omega),
                                  self.params.k)
        return _diag(cn + 1j * sn)

    def transformed_hamiltonian(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        rate = self._m * self.params.omega
        sn, cn, dn = jacobi_sncndn(np.multiply.outer(t, rate), self.params.k)
        f = cn + 1j * sn
        # d/dt conj(f) from sn' = cn dn, cn' = -sn dn
        dconj = rate * (-sn * dn - 1j * cn * dn)
        Hm = hamiltonian_at(t, self.params, self.system)
        rotated = f[..., :, None] * Hm * np.conj(f)[..., None, :]
        return rotated + _diag(-1j * f * dconj)

    def unitary(self, t) -> np.ndarray:
        if self.validity is not Validity.EXACT:
            raise NotApplicable("transformed Hamiltonian is time dependent for these parameters")
        t = np.asarray(t, dtype=float)
        w, V = np.linalg.eigh(self.h0)
        phases = np.exp(-1j * np.multiply.outer(t, w))
        evolve = np.einsum("ij,...j,kj->...ik", V, phases, V.conj())
        inv_alpha = np.conj(self.alpha(t))
        return inv_alpha @ evolve

    def propagate(self, rho0, times) -> Trajectory:
        rho0 = self.system.check_state(rho0)
        times = np.asarray(times, dtype=float)
        U = self.unitary(times)
        states = U @ rho0 @ np.conj(np.swapaxes(U, -1, -2))
        return Trajectory(times=times, states=states, params=self.params, system=self.system)


def _diag(entries):
    entries = np.asarray(entries)
    out = np.zeros(entries.shape + (entries.shape[-1],), dtype=entries.dtype)
    idx = np.arange(entries.shape[-1])
    out[..., idx, idx] = entries
    return out


def build_alpha_propagator(p: FieldParams, sys: SpinSystem, probe_grid=None) -> AlphaPropagator:
    """Construct alpha(t), probe whether the transformed Hamiltonian is constant.

    The default probe grid covers two real periods 4K/w of the field with
    257 points.
    """
    if probe_grid is None:
        period = 2 * math.pi if p.k == 0 else 4.0 * complete_K(p.k)
        probe_grid = np.linspace(0.0, 2.0 * period / p.omega, 257)
    probe_grid = np.asarray(probe_grid, dtype=float)
    provisional = AlphaPropagator(p, sys, np.zeros((sys.d, sys.d), complex),
                                  Validity.NOT_APPLICABLE, math.inf)
    h_t = provisional.transformed_hamiltonian(probe_grid)
    h0 = provisional.transformed_hamiltonian(0.0)
    deviation = float(np.max(np.linalg.norm(h_t - h0, ord=2, axis=(-2, -1))))
    validity = Validity.EXACT if deviation <= ALPHA_TOL else Validity.NOT_APPLICABLE
    return AlphaPropagator(p, sys, h0, validity, deviation)
