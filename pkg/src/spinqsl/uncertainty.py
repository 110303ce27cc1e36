"""Spin covariance, standard deviations and mutual/conditional uncertainty."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dynamics import FieldParams, Trajectory
from .errors import NotApplicable
from .geometry import Curve3D
from .spin_algebra import SpinSystem, expectations

log = logging.getLogger(__name__)

VARIANCE_CLAMP = 1e-12
CONSERVATION_TOL = 1e-9


_clamped = 0


def clamp_variance(var):
    """Set round-off negatives in [-1e-12, 0) to zero; larger negatives are kept."""
    global _clamped
    var = np.asarray(var, dtype=float)
    clamp = (var < 0) & (var >= -VARIANCE_CLAMP)
    n = int(clamp.sum())
    if n:
        _clamped += n
        log.debug("clamped %d slightly negative variances to zero", n)
    return np.where(clamp, 0.0, var)


def clamp_count() -> int:
    """Number of variances clamped to zero since import."""
    return _clamped


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    """Symmetrized spin covariance, shape (..., 3, 3), and derived quantities."""

    cov: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order, shape (..., 3)."""
        return np.linalg.eigvalsh(self.cov)[..., ::-1]

    @property
    def variances(self) -> np.ndarray:
        return clamp_variance(np.diagonal(self.cov, axis1=-2, axis2=-1))

    @property
    def std_devs(self) -> np.ndarray:
        return np.sqrt(self.variances)

    @property
    def sum_of_variances(self) -> np.ndarray:
        return np.trace(self.cov, axis1=-2, axis2=-1)

    def invariants(self) -> np.ndarray:
        """(lambda1 + lambda2, lambda1 * lambda2, lambda3) per sample."""
        lam = self.eigenvalues
        return np.stack([lam[..., 0] + lam[..., 1], lam[..., 0] * lam[..., 1], lam[..., 2]], axis=-1)


def covariance(rho, sys: SpinSystem) -> CovarianceReport:
    """Cov(S_i, S_k) = Tr[rho (C_i C_k + C_k C_i)] / 2 - Tr[rho C_i] Tr[rho C_k]."""
    rho = np.asarray(rho)
    mean = expectations(rho, sys)
    eye = np.eye(sys.d)
    # centered operators avoid cancellation in <A^2> - <A>^2
    centered = [c - mean[..., i, None, None] * eye for i, c in enumerate(sys.C)]
    cov = np.empty(rho.shape[:-2] + (3, 3))
    for i in range(3):
        for k in range(i, 3):
            prod = centered[i] @ centered[k]
            sym = 0.5 * (prod + np.conj(np.swapaxes(prod, -1, -2)))
            cov[..., i, k] = cov[..., k, i] = np.einsum("...ij,...ji->...", rho, sym).real
    return CovarianceReport(cov)


def conservation_applicable(p: FieldParams, S: float) -> bool:
    """Where the variance-sum law is asserted: k = 0 at resonance, or S <= 1."""
    return p.is_consistent() and p.is_resonant() and (p.k == 0.0 or S in (0.5, 1.0))


def deviation_curve(traj: Trajectory) -> Curve3D:
    """Curve (Delta S1, Delta S2, Delta S3)(t) of spin standard deviations."""
    std = covariance(traj.states, traj.system).std_devs
    return Curve3D(traj.times, std)


def deviation_closed_form(t, S: float, p: FieldParams) -> np.ndarray:
    """Closed-form standard deviations at the k = 0 resonance, from |S, S>."""
    if not (p.k == 0.0 and p.is_resonant()):
        raise NotApplicable("closed-form deviations need k = 0 at resonance")
    t = np.asarray(t, dtype=float)
    h, w = p.h, p.omega
    base = 3.0 + np.cos(2 * h * t)
    mix = 2.0 * np.sin(h * t) ** 2 * np.cos(2 * w * t)
    scale = 0.5 * np.sqrt(S / 2.0)
    return scale * np.stack([np.sqrt(base + mix), np.sqrt(base - mix),
                             2.0 * np.abs(np.sin(h * t))], axis=-1)


@dataclass(frozen=True)
class ConservationCheck:
    applicable: bool
    max_deviation: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= CONSERVATION_TOL


def check_conservation(traj: Trajectory) -> ConservationCheck:
    """Largest |sum_i (Delta S_i)^2 - S| along the trajectory."""
    total = covariance(traj.states, traj.system).sum_of_variances
    dev = float(np.max(np.abs(total - traj.system.S)))
    applicable = conservation_applicable(traj.params, traj.system.S) and traj.starts_from_highest_weight()
    return ConservationCheck(applicable, dev)


def product_bounds(values):
    """Harmonic, geometric and arithmetic means over the last axis.

    HM <= GM <= AM, and GM**n is the product of the n entries. HM is 0 when
    any entry is 0.
    """
    x = np.asarray(values, dtype=float)
    if np.any(x < 0):
        raise ValueError("standard deviations must be non-negative")
    n = x.shape[-1]
    arithmetic = x.mean(axis=-1)
    geometric = np.prod(x, axis=-1) ** (1.0 / n)
    with np.errstate(divide="ignore"):
        harmonic = np.where(np.any(x == 0, axis=-1), 0.0, n / np.sum(1.0 / np.where(x == 0, 1.0, x), axis=-1))
    return harmonic, geometric, arithmetic


@dataclass(frozen=True, eq=False)
class UncertaintyReport:
    """Pairwise measures indexed [..., i, k] for components i, k in 0..2.

    mutual[i, k] = DS_i + DS_k - D(S_i + S_k)
    conditional[i, k] = D(S_i + S_k) - DS_k
    conditional_variance[i, k] = Var(S_i + S_k) - Var(S_k)
    """

    std_devs: np.ndarray
    sum_std: np.ndarray
    sum_var: np.ndarray
    mutual: np.ndarray
    conditional: np.ndarray
    conditional_variance: np.ndarray


def conditional_measures(rho, sys: SpinSystem) -> UncertaintyReport:
    """Mutual uncertainty, conditional uncertainty and conditional variance.

    Var(S_i + S_k) is evaluated on the operator C_i + C_k itself.
    """
    rho = np.asarray(rho)
    report = covariance(rho, sys)
    var = report.variances
    std = np.sqrt(var)
    sum_var = np.empty(rho.shape[:-2] + (3, 3))
    for i in range(3):
        for k in range(i, 3):
            op = sys.C[i] + sys.C[k]
            mean = np.einsum("...ij,ji->...", rho, op).real
            shifted = op - mean[..., None, None] * np.eye(sys.d)
            sum_var[..., i, k] = sum_var[..., k, i] = np.einsum(
                "...ij,...jk,...ki->...", rho, shifted, shifted).real
    sum_var = clamp_variance(sum_var)
    sum_std = np.sqrt(sum_var)
    mutual = std[..., :, None] + std[..., None, :] - sum_std
    conditional = sum_std - std[..., None, :]
    conditional_variance = sum_var - var[..., None, :]
    return UncertaintyReport(std, sum_std, sum_var, mutual, conditional, conditional_variance)
