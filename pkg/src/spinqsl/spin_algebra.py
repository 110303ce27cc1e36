"""Spin-S operator matrices, an orthogonal Hermitian basis, coherence vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, InvalidSpin


def as_spin(S) -> float:
    """Validate a spin quantum number and return it as a float.

    Accepts ints, floats, ``Fraction`` and strings such as ``"3/2"``.
    """
    try:
        twice = 2 * float(Fraction(S) if isinstance(S, str) else S)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidSpin(f"cannot interpret spin {S!r}") from exc
    if not math.isfinite(twice):
        raise InvalidSpin(f"spin must be finite, got {S!r}")
    n = round(twice)
    if n < 1 or abs(twice - n) > 1e-9:
        raise InvalidSpin(f"spin must be a positive half-integer, got {S!r}")
    return n / 2


def bloch_radius(S) -> float:
    """Coherence-vector length of the highest-weight state, sqrt(3S/(S+1))."""
    S = as_spin(S)
    return float(np.sqrt(3.0 * S / (S + 1.0)))


def spin_matrices(S):
    """Return (C1, C2, C3) for spin ``S`` with C3 = diag(S, S-1, ..., -S)."""
    S = as_spin(S)
    m = np.arange(S, -S - 1.0, -1.0)
    raising = np.diag(np.sqrt(S * (S + 1.0) - m[1:] * (m[1:] + 1.0)), 1).astype(complex)
    lowering = raising.conj().T
    c1 = 0.5 * (raising + lowering)
    c2 = -0.5j * (raising - lowering)
    c3 = np.diag(m).astype(complex)
    return c1, c2, c3


def _completion(spin_ops, d):
    # Gram-Schmidt of the generalized Gell-Mann set against I, C1, C2, C3
    basis = [np.eye(d, dtype=complex), *spin_ops]
    candidates = []
    for j in range(d):
        for l in range(j + 1, d):
            sym = np.zeros((d, d), complex)
            sym[j, l] = sym[l, j] = 1.0
            asym = np.zeros((d, d), complex)
            asym[j, l] = -1j
            asym[l, j] = 1j
            candidates += [sym, asym]
    for j in range(1, d):
        diag = np.zeros(d)
        diag[:j] = 1.0
        diag[j] = -j
        candidates.append(np.diag(diag).astype(complex))
    for cand in candidates:
        v = cand.copy()
        for b in basis:
            v -= np.trace(b @ v).real / np.trace(b @ b).real * b
        norm = np.sqrt(np.trace(v @ v).real)
        if norm > 1e-9:
            basis.append(v / norm * np.sqrt(2.0))
        if len(basis) == d * d:
            break
    return basis


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """Immutable bundle of spin-S operators.

    Attributes
    ----------
    S : float
        Spin quantum number.
    d : int
        Hilbert-space dimension 2S + 1.
    C : tuple of ndarray
        The spin components (C1, C2, C3).
    basis : tuple of ndarray
        ``d**2`` trace-orthogonal Hermitian matrices; ``basis[0]`` is the
        identity and ``basis[1:4]`` are C1, C2, C3.
    """

    S: float
    d: int
    C: tuple
    basis: tuple = field(repr=False)

    @property
    def r_B(self) -> float:
        return bloch_radius(self.S)

    @property
    def casimir(self) -> float:
        return self.S * (self.S + 1.0)

    def highest_weight_state(self) -> np.ndarray:
        """Density matrix with rho[0, 0] = 1 (the state |S, S>)."""
        rho = np.zeros((self.d, self.d), complex)
        rho[0, 0] = 1.0
        return rho

    def check_state(self, rho, atol: float = 1e-12) -> np.ndarray:
        """Validate a density matrix (or a stack of them) for this system."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[-2:] != (self.d, self.d):
            raise DimensionMismatch(f"expected {self.d}x{self.d} density matrix, got {rho.shape}")
        if not np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), atol=atol):
            raise ValueError("density matrix is not Hermitian")
        if not np.allclose(np.trace(rho, axis1=-2, axis2=-1), 1.0, atol=atol):
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise ValueError("density matrix is not positive semidefinite")
        return rho


def make_spin_system(S) -> SpinSystem:
    S = as_spin(S)
    ops = spin_matrices(S)
    d = int(round(2 * S)) + 1
    basis = _completion(ops, d)
    return SpinSystem(S=S, d=d, C=tuple(ops), basis=tuple(basis))


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def expectations(rho, sys: SpinSystem) -> np.ndarray:
    """Tr(rho C_i) for i = 1, 2, 3; works on stacks of density matrices."""
    rho = np.asarray(rho)
    if rho.shape[-2:] != (sys.d, sys.d):
        raise DimensionMismatch(f"expected {sys.d}x{sys.d} density matrix, got {rho.shape}")
    return np.stack([np.einsum("...ij,ji->...", rho, c).real for c in sys.C], axis=-1)


def coherence_vector(rho, sys: SpinSystem) -> np.ndarray:
    """Normalized spin vector R_i = sqrt(3 / (S(S+1))) Tr(rho C_i).

    The scale puts |S, S> at distance r_B = sqrt(3S/(S+1)) from the origin.
    Returns an array of shape ``rho.shape[:-2] + (3,)``.
    """
    return np.sqrt(3.0 / sys.casimir) * expectations(rho, sys)


def coherence_components(rho, sys: SpinSystem) -> np.ndarray:
    """All d**2 expansion coefficients R_nu, with R_0 = 1.

    R_nu = sqrt(d / Tr(C_nu^2)) Tr(rho C_nu); entries 1..3 coincide with
    ``coherence_vector``.
    """
    rho = np.asarray(rho)
    if rho.shape[-2:] != (sys.d, sys.d):
        raise DimensionMismatch(f"expected {sys.d}x{sys.d} density matrix, got {rho.shape}")
    out = []
    for b in sys.basis:
        scale = np.sqrt(sys.d / np.trace(b @ b).real)
        out.append(scale * np.einsum("...ij,ji->...", rho, b).real)
    return np.stack(out, axis=-1)


def density_from_components(R, sys: SpinSystem) -> np.ndarray:
    """Inverse of ``coherence_components``."""
    R = np.asarray(R, dtype=float)
    rho = np.zeros(R.shape[:-1] + (sys.d, sys.d), complex)
    for coeff, b in zip(np.moveaxis(R, -1, 0), sys.basis):
        norm = np.trace(b @ b).real
        rho += (coeff / np.sqrt(sys.d * norm))[..., None, None] * b
    return rho
