"""Self-check suites run by ``spinqsl validate``.

Each check yields a :class:`CheckResult` whose status is ``pass``, ``fail``
or ``not_applicable``. Samples come from a fixed-seed generator so reports
are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.integrate import quad

from . import elliptic, qsl, uncertainty
from .dynamics import (FieldParams, Validity, analytic_resonance_spin, build_alpha_propagator,
                       propagate_numeric)
from .geometry import Curve3D, circulation
from .spin_algebra import as_spin, make_spin_system

SUITES = ("special_functions", "dynamics", "conservation", "qsl")
SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    status: str
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _check(suite, name, value, tol, detail=""):
    ok = bool(np.isfinite(value) and value <= tol)
    return CheckResult(suite, name, "pass" if ok else "fail", float(value), tol, detail)


def special_functions_suite(n: int = 2000) -> list[CheckResult]:
    rng = np.random.default_rng(SEED)
    suite = "special_functions"
    out = []
    k = rng.uniform(0.0, 0.999, n)
    u = rng.uniform(-30.0, 30.0, n)
    sn = np.empty(n)
    cn = np.empty(n)
    dn = np.empty(n)
    for i in range(n):
        sn[i], cn[i], dn[i] = elliptic.jacobi_sncndn(u[i], k[i])
    out.append(_check(suite, "sn^2 + cn^2 = 1", np.max(np.abs(sn ** 2 + cn ** 2 - 1)), 1e-12))
    out.append(_check(suite, "dn^2 + k^2 sn^2 = 1", np.max(np.abs(dn ** 2 + k ** 2 * sn ** 2 - 1)), 1e-12))
    ref = special.ellipj(u, k ** 2)
    worst = max(np.max(np.abs(a - b)) for a, b in zip((sn, cn, dn), ref[:3]))
    out.append(_check(suite, "sn cn dn vs scipy.special.ellipj", worst, 1e-12 * 30,
                      "absolute, |u| <= 30"))
    K = np.array([elliptic.complete_K(x) for x in k[:200]])
    out.append(_check(suite, "K vs scipy.special.ellipk",
                      np.max(np.abs(K / special.ellipk(k[:200] ** 2) - 1)), 1e-12))
    shifted = np.array([elliptic.jacobi_sncndn(u[i] + 4 * K[i], k[i])[0] for i in range(200)])
    out.append(_check(suite, "sn(u + 4K) = sn(u)", np.max(np.abs(shifted - sn[:200])), 1e-11))
    m = rng.uniform(-50.0, 1.0, 50)
    phi = rng.uniform(-6.0, 6.0, 50)
    err = 0.0
    for mi, ph in zip(m, phi):
        ref_val, _ = quad(lambda x: math.sqrt(1 - mi * math.sin(x) ** 2), 0.0, ph,
                          epsabs=0.0, epsrel=1e-13, limit=200)
        err = max(err, abs(elliptic.incomplete_E(ph, mi) - ref_val) / max(1.0, abs(ref_val)))
    out.append(_check(suite, "E(phi|m) vs quadrature, m in [-50, 1]", err, 1e-12))
    return out


def dynamics_suite() -> list[CheckResult]:
    suite = "dynamics"
    out = []
    for S in (0.5, 1.0):
        sys = make_spin_system(S)
        for k in (0.0, 0.5, 0.9):
            p = FieldParams.resonant_field(2.0, 1.0, k)
            traj = propagate_numeric(sys.highest_weight_state(), p, sys, 2 * math.pi,
                                     n_steps=30000, sample_every=30)
            err = np.max(np.abs(traj.coherence - analytic_resonance_spin(traj.times, p, sys)))
            out.append(_check(suite, f"numeric vs closed form S={S:g} k={k:g}", err, 1e-7))
    sys = make_spin_system(2)
    p = FieldParams(h1=1.3, h2=0.7, H=0.9, omega=1.1, k=0.6)
    fwd = propagate_numeric(sys.highest_weight_state(), p, sys, 3.0, n_steps=3000)
    back = propagate_numeric(fwd.states[-1], p, sys, 0.0, n_steps=3000, t_start=3.0)
    out.append(_check(suite, "time reversal returns the initial state",
                      np.max(np.abs(back.states[-1] - fwd.states[0])), 1e-10))
    out.append(_check(suite, "purity preserved", np.max(np.abs(fwd.purity() - 1)), 1e-12))
    for S, k, expect in ((1.0, 0.7, Validity.EXACT), (2.0, 0.0, Validity.EXACT),
                         (1.5, 0.5, Validity.NOT_APPLICABLE)):
        ap = build_alpha_propagator(FieldParams.resonant_field(2.0, 1.0, k), make_spin_system(S))
        ok = ap.validity is expect
        out.append(CheckResult(suite, f"gauge propagator S={S:g} k={k:g} is {expect.value}",
                               "pass" if ok else "fail", ap.max_deviation, None))
    return out


def conservation_suite(spin=None, k: Optional[float] = None) -> list[CheckResult]:
    suite = "conservation"
    cases = [(as_spin(spin), 0.0 if k is None else float(k))] if spin is not None else \
        [(S, 0.0) for S in (0.5, 1.0, 1.5, 2.0, 3.0, 5.0)] + [(0.5, 0.5), (1.0, 0.5)]
    out = []
    for S, kk in cases:
        name = f"sum of variances = S for S={S:g} k={kk:g}"
        p = FieldParams.resonant_field(2.0, 1.0, kk)
        if not uncertainty.conservation_applicable(p, S):
            out.append(CheckResult(suite, name, "not_applicable", detail=(
                "the variance-sum law is asserted only at k = 0 or for S <= 1")))
            continue
        sys = make_spin_system(S)
        traj = propagate_numeric(sys.highest_weight_state(), p, sys, 2 * math.pi, n_steps=2000)
        out.append(_check(suite, name, uncertainty.check_conservation(traj).max_deviation, 1e-9))
    return out


def qsl_suite() -> list[CheckResult]:
    suite = "qsl"
    out = []
    h, H = 2.0, 1.0
    E_ref, _ = quad(lambda x: math.sqrt(1 + (H / h) ** 2 * math.sin(x) ** 2), 0.0, math.pi / 2,
                    epsabs=0.0, epsrel=1e-13)
    ref = math.pi ** 2 * math.sqrt(0.5) / (math.sqrt(2) * h * E_ref)
    out.append(_check(suite, "tau_qsl(1/2, 2, 1) vs quadrature", abs(qsl.tau_qsl(0.5, h, H) - ref), 1e-9))
    for S, expected in ((0.5, 1.0), (1.0, 2.0), (1.5, 2.25), (2.0, 2.343)):
        out.append(_check(suite, f"ratio limit S={S:g}", abs(qsl.qsl_ratio_limit(S) - expected), 1e-3))
    out.append(_check(suite, "tau_qsl h -> 0 limit",
                      abs(qsl.tau_qsl(2.0, 1e-7, 1.0) / qsl.tau_qsl_limit(2.0, 1.0) - 1), 1e-9))
    err = abs(qsl.pole_distance(100.0, 1.0, 0.0, 1.0) / make_spin_system(1).r_B - math.pi)
    out.append(_check(suite, "pole distance near pi r_B at h/H = 100", err, 8e-5))
    for S in (0.5, 1.0, 2.0):
        sys = make_spin_system(S)
        p = FieldParams.resonant_field(h, H)
        traj = propagate_numeric(sys.highest_weight_state(), p, sys, math.pi, n_steps=20000,
                                 sample_every=5)
        C = circulation(Curve3D(traj.times, traj.coherence))
        expected = 3 * math.pi * S / (S + 1) * (2 * h + H ** 2 / h)
        out.append(_check(suite, f"circulation S={S:g}", abs(C / expected - 1), 1e-6))
        rep = qsl.mt_check(traj, "full")
        out.append(_check(suite, f"Mandelstam-Tamm margins S={S:g}",
                          -min(rep.mt_margin, rep.mt1_margin), 1e-9))
    return out


_RUNNERS: dict[str, Callable[..., list[CheckResult]]] = {
    "special_functions": special_functions_suite,
    "dynamics": dynamics_suite,
    "conservation": conservation_suite,
    "qsl": qsl_suite,
}


def run_suites(name: str, spin=None, k: Optional[float] = None) -> list[CheckResult]:
    """Run one suite, or all of them for ``name == "all"``."""
    if name != "all" and name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}")
    names = SUITES if name == "all" else (name,)
    results = []
    for n in names:
        if n == "conservation":
            results += conservation_suite(spin, k)
        else:
            results += _RUNNERS[n]()
    return results
