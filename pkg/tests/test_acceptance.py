"""Acceptance criteria, one test per criterion (lettered where a criterion has parts).

A summary line per test and per criterion is printed at the end of the run
by the hook in conftest.py.
"""
import math
import time

import mpmath as mp
import numpy as np
import pytest
from scipy import special
from scipy.integrate import quad

from spinqsl import elliptic, geometry, qsl, uncertainty
from spinqsl.dynamics import FieldParams, analytic_resonance_spin, propagate_numeric
from spinqsl.geometry import Curve3D
from spinqsl.spin_algebra import make_spin_system

FIG = FieldParams.resonant_field(2.0, 1.0, 0.0)
WINDOW = 2


def _run(S, p, t_end, n_steps, sample_every=1):
    sys = make_spin_system(S)
    return propagate_numeric(sys.highest_weight_state(), p, sys, t_end,
                             n_steps=n_steps, sample_every=sample_every)


def _closed_form_error(S, k, n_steps=30000):
    p = FieldParams.resonant_field(2.0, 1.0, k)
    traj = _run(S, p, 4 * math.pi / p.h, n_steps, sample_every=10)
    exact = analytic_resonance_spin(traj.times, p, traj.system)
    return float(np.max(np.abs(traj.coherence - exact)))


# --- 1: analytic / numeric equivalence --------------------------------------

def test_c01a_closed_form_matches_propagator_for_qubit_and_qutrit():
    start = time.perf_counter()
    errors = {(S, k): _closed_form_error(S, k) for S in (0.5, 1.0) for k in (0.0, 0.5, 0.9)}
    elapsed = time.perf_counter() - start
    print(f"max errors {errors}, runtime {elapsed:.2f} s")
    assert max(errors.values()) <= 1e-7
    assert elapsed < 5.0


def test_c01b_closed_form_matches_propagator_for_higher_spins_at_k0():
    errors = {S: _closed_form_error(S, 0.0) for S in (1.5, 2.0, 5.0)}
    print(f"max errors {errors}")
    assert max(errors.values()) <= 1e-7


# --- 2: conservation of the variance sum ------------------------------------

def _conservation_deviation(S, k):
    p = FieldParams.resonant_field(2.0, 1.0, k)
    # 1998 steps kept every 2nd step: 1000 sampled times over one field period
    traj = _run(S, p, 2 * math.pi, 1998, sample_every=2)
    assert len(traj) == 1000
    return uncertainty.check_conservation(traj).max_deviation


def test_c02a_variance_sum_conserved_where_asserted():
    spins = [j / 2 for j in range(1, 21)]
    dev = {(S, 0.0): _conservation_deviation(S, 0.0) for S in spins}
    dev.update({(S, 0.5): _conservation_deviation(S, 0.5) for S in (0.5, 1.0)})
    print(f"worst deviation {max(dev.values()):.3e}")
    assert max(dev.values()) <= 1e-9


def test_c02b_variance_sum_fails_for_spin_three_halves_at_k05():
    dev = _conservation_deviation(1.5, 0.5)
    print(f"S=3/2, k=0.5: max |sum of variances - S| = {dev:.3e}")
    assert dev > 1e-3


# --- 3: covariance spectrum --------------------------------------------------

def test_c03_covariance_eigenvalues_along_closed_form_trajectories():
    worst = 0.0
    for S, k in [(0.5, 0.0), (1.0, 0.0), (2.0, 0.0), (5.0, 0.0), (0.5, 0.5), (1.0, 0.9)]:
        traj = _run(S, FieldParams.resonant_field(2.0, 1.0, k), 2 * math.pi, 4000, sample_every=4)
        lam = uncertainty.covariance(traj.states, traj.system).eigenvalues
        worst = max(worst, float(np.max(np.abs(lam - [S / 2, S / 2, 0.0]))))
    print(f"worst eigenvalue deviation {worst:.3e}")
    assert worst <= 1e-9


# --- 4: universal pi limit ---------------------------------------------------

def test_c04_pole_distance_approaches_pi_as_inverse_square():
    S = 1.0
    r_B = make_spin_system(S).r_B
    ratios = np.array([10.0, 100.0, 1000.0])
    errors = np.array([qsl.pole_distance(r, 1.0, 0.0, S) / r_B - math.pi for r in ratios])
    slope = np.polyfit(np.log(ratios), np.log(errors), 1)[0]
    print(f"errors {errors}, slope {slope:.4f}")
    assert np.all(errors > 0)
    assert errors[1] <= 8e-5
    assert abs(slope + 2.0) <= 0.1


# --- 5: Mandelstam-Tamm inequalities -----------------------------------------

def _sweep(n=50, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        if rng.random() < 0.5:
            S, k = float(rng.choice([0.5, 1.0])), float(rng.uniform(0.0, 0.95))
        else:
            S, k = float(rng.choice([1.5, 2.0, 2.5, 3.0])), 0.0
        yield S, FieldParams.resonant_field(float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.2, 3.0)), k)


def test_c05a_margins_non_negative_over_parameter_sweep():
    worst = math.inf
    count = 0
    for S, p in _sweep():
        tau = math.pi / p.h
        traj = _run(S, p, tau, max(2000, math.ceil(400 * tau * p.max_rate())))
        rep = qsl.mt_check(traj, "full")
        worst = min(worst, rep.mt_margin, rep.mt1_margin)
        count += 1
    print(f"{count} parameter sets, smallest margin {worst:.3e}")
    assert count == 50
    assert worst >= -1e-9


def test_c05b_bound_saturates_for_strong_transverse_field():
    p = FieldParams.resonant_field(100.0, 1.0, 0.0)
    for S in (0.5, 1.0, 2.0):
        traj = _run(S, p, math.pi / p.h, 4000)
        rep = qsl.mt_check(traj, "full")
        rel = rep.mt_product / qsl.mt_bound(S) - 1.0
        print(f"S={S}: relative excess {rel:.3e}")
        assert 0.0 <= rel <= 0.01


# --- 6: bound formulas ---------------------------------------------------------

def test_c06a_tau_qsl_matches_quadrature_and_h0_limit():
    S, h, H = 0.5, 2.0, 1.0
    E_ref, _ = quad(lambda x: math.sqrt(1.0 + (H / h) ** 2 * math.sin(x) ** 2), 0.0, math.pi / 2,
                    epsabs=0.0, epsrel=1e-13)
    oracle = math.pi ** 2 * math.sqrt(S) / (math.sqrt(2.0) * h * E_ref)
    assert abs(qsl.tau_qsl(S, h, H) - oracle) <= 1e-9
    for S in (0.5, 1.0, 1.5, 2.0, 3.0, 10.0):
        limit = math.pi ** 2 * math.sqrt(S) / (math.sqrt(2.0) * H)
        assert qsl.tau_qsl_limit(S, H) == pytest.approx(limit, rel=1e-15)
        assert abs(qsl.tau_qsl(S, 1e-7, H) / limit - 1.0) <= 1e-9


def test_c06b_tau1_qsl_h0_limit_matches_rounded_closed_form():
    H = 1.0
    mismatch = {}
    for S in (0.5, 1.0, 1.5, 2.0, 3.0, 10.0):
        finite = qsl.tau1_qsl(S, 1e-7, H)
        mismatch[S] = finite / qsl.tau1_qsl_limit(S, H) - 1.0
    print(f"relative mismatch of the h -> 0 limit: {mismatch}")
    assert max(abs(v) for v in mismatch.values()) <= 1e-9


# --- 7: ratio table -----------------------------------------------------------

def test_c07_ratio_table():
    for S, expected in [(0.5, 1.0), (1.0, 2.0), (1.5, 2.25), (2.0, 2.343)]:
        assert abs(qsl.qsl_ratio_limit(S) - expected) <= 1e-3
    assert abs(qsl.qsl_ratio_limit(50) - math.pi ** 2 / 4) <= 1e-3


# --- 8: circulation -----------------------------------------------------------

def test_c08_circulation_closed_form_and_growth_in_spin():
    h, H = 2.0, 1.0
    T_c, m, l = geometry.closure_period(FIG)
    values = []
    for S in (0.5, 1.0, 2.0):
        traj = _run(S, FIG, T_c, 20000, sample_every=5)
        C = geometry.circulation(Curve3D(traj.times, traj.coherence))
        expected = 3 * math.pi * S / (S + 1) * (2 * h + H ** 2 / h)
        print(f"S={S}: C = {C:.12f}, closed form {expected:.12f}")
        assert abs(C / expected - 1.0) <= 1e-6
        values.append(C)
    assert values[0] < values[1] < values[2]


# --- 9: apex speed identity ---------------------------------------------------

def test_c09_apex_speed_equals_scaled_energy_spread():
    worst = 0.0
    for S, k in [(0.5, 0.0), (0.5, 0.7), (1.0, 0.5), (2.0, 0.0), (3.0, 0.0)]:
        p = FieldParams.resonant_field(2.0, 1.0, k)
        traj = _run(S, p, math.pi / p.h, 20000, sample_every=4)
        speed = qsl.apex_speed(traj)
        dE = qsl.energy_stats(traj).std_dev
        pf = qsl.p_factor(S)
        rel = np.abs(speed - math.sqrt(4 * pf) * dE) / dE
        worst = max(worst, float(rel.max()))
    print(f"worst relative mismatch {worst:.3e}")
    assert worst <= 1e-7


# --- 10: event alignment along the preset trajectories ---------------------------

@pytest.fixture(scope="module")
def fig_traj():
    return _run(1.0, FIG, math.pi, 4000)


def _s3(traj):
    return traj.coherence[:, 2] / math.sqrt(3.0 / traj.system.casimir)


def test_c10a_hodograph_speed_minima_at_torsion_sign_changes(fig_traj):
    fd = geometry.frenet_analyze(Curve3D(fig_traj.times, fig_traj.coherence))
    vmin = geometry.local_minima(fd.speed)
    flips = geometry.sign_changes(fd.torsion_sign())
    print(f"V minima at t={fig_traj.times[vmin]}, torsion flips at t={fig_traj.times[flips]}")
    assert vmin.size > 0
    assert geometry.events_aligned(vmin, flips, WINDOW)


def test_c10b_hodograph_speed_minima_at_s3_sign_changes(fig_traj):
    fd = geometry.frenet_analyze(Curve3D(fig_traj.times, fig_traj.coherence))
    vmin = geometry.local_minima(fd.speed)
    zeros = geometry.sign_changes(_s3(fig_traj))
    print(f"V minima at t={fig_traj.times[vmin]}, S3 sign changes at t={fig_traj.times[zeros]}")
    assert vmin.size > 0 and zeros.size > 0
    assert geometry.events_aligned(vmin, zeros, WINDOW)
    assert geometry.events_aligned(zeros, vmin, WINDOW)


def test_c10c_deviation_curve_torsion_flips_at_s3_sign_changes(fig_traj):
    fd = geometry.frenet_analyze(uncertainty.deviation_curve(fig_traj))
    flips = geometry.sign_changes(fd.torsion_sign())
    zeros = geometry.sign_changes(_s3(fig_traj))
    print(f"torsion flips at t={fig_traj.times[flips]}, S3 sign changes at t={fig_traj.times[zeros]}")
    assert zeros.size > 0
    assert geometry.events_aligned(zeros, flips, WINDOW)


def test_c10d_deviation_curve_speed_minima_at_s3_sign_changes(fig_traj):
    fd = geometry.frenet_analyze(uncertainty.deviation_curve(fig_traj))
    vmin = geometry.local_minima(fd.speed)
    zeros = geometry.sign_changes(_s3(fig_traj))
    offsets = geometry.event_offsets(zeros, vmin)
    print(f"V minima at t={fig_traj.times[vmin]}; grid offsets from S3 sign changes {offsets}")
    assert zeros.size > 0
    assert np.all(offsets <= WINDOW)


def test_c10e_mean_inequalities_with_local_near_equality(fig_traj):
    std = uncertainty.covariance(fig_traj.states, fig_traj.system).std_devs
    for idx in ([0, 1], [0, 1, 2]):
        hm, gm, am = uncertainty.product_bounds(std[:, idx])
        assert np.all(hm <= gm + 1e-12) and np.all(gm <= am + 1e-12)
    hm, gm, am = uncertainty.product_bounds(std[:, [0, 1]])
    gap = am - hm
    assert gap.min() < 0.05 * gap.max()


def _extrema_alignment(traj):
    rep = uncertainty.conditional_measures(traj.states, traj.system)
    zeros = geometry.sign_changes(_s3(traj))
    series = {"M": rep.mutual[:, 0, 1], "Delta": rep.conditional[:, 0, 1],
              "Var": rep.conditional_variance[:, 0, 1]}
    offsets = {name: geometry.event_offsets(zeros, geometry.local_extrema(v))
               for name, v in series.items()}
    return zeros, offsets


def test_c10f_measures_extreme_at_s3_sign_changes_low_frequency(fig_traj):
    zeros, offsets = _extrema_alignment(fig_traj)
    print(f"S3 sign changes at t={fig_traj.times[zeros]}; grid offsets to nearest extremum {offsets}")
    assert zeros.size > 0
    assert all(np.all(o <= WINDOW) for o in offsets.values())


def test_c10g_measures_extreme_at_s3_sign_changes_high_frequency():
    p = FieldParams.resonant_field(2.0, 20.0, 0.0)
    traj = _run(1.0, p, math.pi, 20000, sample_every=5)
    zeros, offsets = _extrema_alignment(traj)
    print(f"S3 sign changes at t={traj.times[zeros]}; grid offsets {offsets}")
    assert zeros.size > 0
    assert all(np.all(o <= WINDOW) for o in offsets.values())


def test_c10h_conditional_variance_vanishes_at_south_pole(fig_traj):
    south = int(np.argmin(_s3(fig_traj)))
    rep = uncertainty.conditional_measures(fig_traj.states[south], fig_traj.system)
    value = float(rep.conditional_variance[0, 1])
    print(f"S3 = {_s3(fig_traj)[south]:.12f} at t = {fig_traj.times[south]:.6f}; Var(S1|S2) = {value:.6e}")
    assert abs(value) <= 1e-8


# --- 11: special functions ----------------------------------------------------

def test_c11_special_function_suites():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    n = 10_000
    u = rng.uniform(-50.0, 50.0, n)
    k = rng.uniform(0.0, 0.999, n)
    out = np.array([elliptic.jacobi_sncndn(u[i], k[i]) for i in range(n)])
    sn, cn, dn = out[:, 0], out[:, 1], out[:, 2]
    # identities
    assert np.max(np.abs(sn ** 2 + cn ** 2 - 1)) <= 1e-12
    assert np.max(np.abs(dn ** 2 + k ** 2 * sn ** 2 - 1)) <= 1e-12
    # periodicity in the real period 4K, and the half-period sign flip
    K = np.array([elliptic.complete_K(x) for x in k])
    shifted = np.array([elliptic.jacobi_sncndn(u[i] + 4 * K[i], k[i]) for i in range(n)])
    assert np.max(np.abs(shifted - out)) <= 1e-12
    half = np.array([elliptic.jacobi_sncndn(u[i] + 2 * K[i], k[i]) for i in range(n)])
    assert np.max(np.abs(half[:, 0] + sn)) <= 1e-12
    # oracles: scipy on every sample, mpmath on a subset
    ref = special.ellipj(u, k ** 2)
    assert max(np.max(np.abs(a - b)) for a, b in zip((sn, cn, dn), ref[:3])) <= 1e-12
    assert np.max(np.abs(K / special.ellipk(k ** 2) - 1)) <= 1e-12
    phi = rng.uniform(-2 * math.pi, 2 * math.pi, n)
    m = rng.uniform(-100.0, 1.0, n)
    E = np.array([elliptic.incomplete_E(a, b) for a, b in zip(phi, m)])
    E_ref = special.ellipeinc(phi, m)
    assert np.max(np.abs(E - E_ref) / np.maximum(1.0, np.abs(E_ref))) <= 1e-12
    for i in range(0, n, 20):
        exact = mp.ellipfun("sn", u[i], m=k[i] ** 2)
        assert abs(sn[i] - float(exact)) <= 1e-12
        e_exact = float(mp.ellipe(phi[i], m[i]))
        assert abs(E[i] - e_exact) <= 1e-12 * max(1.0, abs(e_exact))
    elapsed = time.perf_counter() - start
    print(f"runtime {elapsed:.2f} s")
    assert elapsed < 10.0
