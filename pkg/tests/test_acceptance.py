"""
Acceptance criteria 1-11.

Each test prints one PASS/FAIL line (collected again in the terminal summary)
and then asserts. Tolerances are the contractual ones. Constants ``C`` of
criteria 8 and 10 were fitted once, at the reference hbar named next to them,
doubled as a margin and frozen here.
"""

import numpy as np
import pytest

from conftest import record
from semidirac.analyses import cyclotron_shift, helicity_drift, monopole_check, spin_hall_drift
from semidirac.constants import PhysConstants, energy
from semidirac.dynamics import (
    ParticleState,
    delta_E,
    delta_E_pauli,
    grad_delta_E,
    implicit_residual,
    integrate,
    rhs,
)
from semidirac.fields import FieldConfig, sample
from semidirac.fw_verify import (
    berry_connection_closed,
    berry_connection_numeric,
    berry_curvature_closed,
    berry_curvature_matrix,
    diagonalization_residual,
    loglog_slope,
    max_relative_error,
    momentum_grid,
)
from semidirac.spin import spin_from_spinor, spinor_from_spin

Z3 = np.zeros(3)
TOL = 1e-10

# criterion 8: relative energy drift / (hbar^2 T), fitted at hbar = 0.1, T = 100
C_ENERGY = {"planar": 2.9e-4, "generic": 1.24e-3}
# criterion 10: max |S_spinor - S_vector| / ((hbar^2 + tol) T), fitted at hbar = 1e-2, T = 50
C_SPINOR = 420.0


def test_criterion_01_connection_oracle():
    grid = momentum_grid(100, 5.0)
    err = max(max_relative_error(berry_connection_numeric(p), berry_connection_closed(p)) for p in grid)
    ok = record(1, err <= 1e-6, f"connection finite-difference vs closed form: max rel error {err:.3e} (<= 1e-6)")
    assert ok


def test_criterion_02_curvature_oracle():
    grid = momentum_grid(100, 5.0)
    err = max(max_relative_error(berry_curvature_matrix(p), berry_curvature_closed(p)) for p in grid)
    abel = max(max_relative_error(berry_curvature_matrix(p, abelian=True), berry_curvature_closed(p)) for p in grid)
    ok = err <= 1e-6 and abel >= 0.10
    record(2, ok, f"non-Abelian curl max rel error {err:.3e} (<= 1e-6); Abelian curl deviation {abel:.3f} (>= 0.10)")
    assert ok


def test_criterion_03_diagonalization_order():
    hbars = [1e-1, 1e-2, 1e-3, 1e-4]
    p, H = (0.5, 0.3, 0.0), (0.0, 0.0, 0.1)
    off = [diagonalization_residual(p, H, PhysConstants(hbar=h)).offdiag_norm for h in hbars]
    slope = loglog_slope(hbars, off)
    ok = record(3, slope >= 1.0, f"off-diagonal block norm log-log slope {slope:.4f} (>= 1.0)")
    assert ok


def _spin_hall(model):
    cfg = FieldConfig.uniform(E0=(1e-4, 0, 0))
    s = ParticleState(0.0, Z3, np.array([0.1, 0, 0]), np.array([0, 0, 1.0]))
    return integrate(s, cfg, model, PhysConstants(hbar=1.0), T=20.0, tol=TOL, output_every=0.1)


def test_criterion_04_spin_hall():
    rep = spin_hall_drift(_spin_hall("berry"), _spin_hall("pauli"))
    ratio = rep.details["model_ratio"]
    ok = rep.rel_error <= 0.02 and abs(ratio - 2.0) <= 0.05
    record(
        4,
        ok,
        f"spin-Hall drift {rep.measured:.5e} vs {rep.predicted:.5e}: rel error {rep.rel_error:.4f} (<= 0.02); "
        f"berry/pauli ratio {ratio:.4f} (2.00 +- 0.05)",
    )
    assert ok


def _cyclotron(model, hbar=0.01):
    H, p = 0.01, 0.1
    s = ParticleState(0.0, Z3, np.array([p, 0, 0]), np.array([0, 0, 1.0]))
    T = 8.6 * 2 * np.pi * energy(s.p) / H
    return integrate(s, FieldConfig.uniform(H0=(0, 0, H)), model, PhysConstants(hbar=hbar), T=T, tol=TOL,
                     output_every=5.0)


def test_criterion_05_cyclotron_shift():
    rep = cyclotron_shift(_cyclotron("berry"), _cyclotron("pauli"))
    d = rep.details
    freq_ok = rep.rel_error <= 1e-3
    sign_ok = d["opposite_sign"]
    diff_ok = d["difference_rel_error"] <= 0.05
    ok = freq_ok and sign_ok and diff_ok
    record(
        5,
        ok,
        f"frequency {rep.measured:.7f} vs {rep.predicted:.7f}: rel error {rep.rel_error:.2e} (<= 1e-3) "
        f"[{'ok' if freq_ok else 'fail'}]; spin terms full {d['spin_term_full']:+.3e} "
        f"(pred {d['predicted_spin_term_full']:+.1e}), pauli {d['spin_term_pauli']:+.3e} "
        f"(pred {d['predicted_spin_term_pauli']:+.1e}), opposite signs {sign_ok} "
        f"[{'ok' if sign_ok else 'fail'}]; scaled difference {d['scaled_difference']:.3e} vs "
        f"{d['predicted_scaled_difference']:.1e}, rel error {d['difference_rel_error']:.3f} (<= 0.05) "
        f"[{'ok' if diff_ok else 'fail'}]",
    )
    assert ok


def test_criterion_06_monopole():
    cfg = FieldConfig.uniform(E0=(0, 1e-3, 0))
    k = PhysConstants(hbar=1.0)
    p = np.array([20.0, 0, 0])
    tr = integrate(ParticleState(0.0, Z3, p, p / 20), cfg, "berry", k, T=5.0, tol=TOL, output_every=0.5)
    rep = monopole_check(tr, tolerance=0.01)
    plus = monopole_check(ParticleState(0.0, Z3, p, p / 20), cfg, k)
    minus = monopole_check(ParticleState(0.0, Z3, p, -p / 20), cfg, k)
    flip = np.array_equal(np.array(minus.details["measured_vector"]), -np.array(plus.details["measured_vector"]))
    ok = rep.rel_error <= 0.01 and flip
    record(6, ok, f"anomalous velocity at |p| = 20mc: worst rel error {rep.rel_error:.4f} (<= 0.01); "
                  f"exact sign flip with helicity {flip}")
    assert ok


def test_criterion_07_helicity_drift():
    cfg = FieldConfig.uniform(H0=(0, 0, 0.01))
    s = ParticleState(0.0, Z3, np.array([20.0, 0, 0]), np.array([1.0, 0, 0]))
    tr = integrate(s, cfg, "berry", PhysConstants(hbar=1.0), T=50.0, tol=TOL, output_every=0.5)
    rep = helicity_drift(tr, tolerance=0.02)
    ok = record(
        7,
        rep.passed,
        f"parallel drift {rep.measured:+.4e} vs {rep.predicted:+.4e}: rel error {rep.rel_error:.3f} (<= 0.02); "
        f"energy-gradient part {rep.details['energy_gradient_parallel_velocity']:+.3e}",
    )
    assert ok


def _energy_drift(cfg, state, hbar, T=100.0):
    tr = integrate(state, cfg, "berry", PhysConstants(hbar=hbar), T=T, tol=TOL)
    return float(np.max(np.abs(tr.energy - tr.energy[0])) / abs(tr.energy[0]))


def test_criterion_08_conservation():
    lines, ok = [], True

    cfg = FieldConfig.crossed_uniform(E0=(0, 1e-3, 0), H0=(0.01, 0, 0.05))
    s = ParticleState(0.0, Z3, np.array([0.5, 0.0, 0.2]), np.array([1.0, 0.0, 0.0]))
    tr = integrate(s, cfg, "berry", PhysConstants(hbar=0.01), scheme="rk4_fixed", T=1000.0, dt=0.1,
                   output_every=1.0)
    sdrift = float(np.max(np.abs(np.linalg.norm(tr.S, axis=1) - 1)))
    ok &= sdrift <= 1e-9 and tr.n_steps == 10_000
    lines.append(f"|S| drift {sdrift:.1e} over {tr.n_steps} steps (<= 1e-9)")

    T = 100.0
    electrostatic = (FieldConfig.coulomb(Z=-0.5, softening=0.05),
                     ParticleState(0.0, np.array([2.0, 0, 0]), np.array([0, 0.4, 0.1]), np.array([0.6, 0, 0.8])))
    planar = (FieldConfig.coulomb(Z=-0.5, softening=0.05, H0=(0, 0, 0.05)),
              ParticleState(0.0, np.array([2.0, 0, 0]), np.array([0, 0.4, 0.0]), np.array([0.6, 0, 0.8])))
    generic = (FieldConfig.coulomb(Z=-0.5, softening=0.05, H0=(0, 0.02, 0.05)),
               ParticleState(0.0, np.array([2.0, 0, 0]), np.array([0, 0.4, 0.1]), np.array([0.6, 0, 0.8])))
    for name, (cfg, st), C in (("electrostatic", electrostatic, 0.0), ("planar", planar, C_ENERGY["planar"]),
                               ("generic", generic, C_ENERGY["generic"])):
        worst = 0.0
        for hb in (1e-1, 1e-2):
            drift = _energy_drift(cfg, st, hb, T)
            bound = max(10 * TOL, C * hb**2 * T)
            worst = max(worst, drift / bound)
        ok &= worst <= 1.0
        lines.append(f"{name} energy drift / bound worst {worst:.2f} (<= 1)")
    record(8, ok, "; ".join(lines))
    assert ok


def test_criterion_09_implicit_consistency():
    cfg = FieldConfig.coulomb(Z=0.8, softening=0.2, H0=(0.02, -0.03, 0.1))
    rng = np.random.default_rng(9)
    spread = 0.0
    for _ in range(10):
        S = rng.normal(size=3)
        s = ParticleState(0.0, rng.uniform(-1, 1, 3), rng.uniform(-2, 2, 3), S / np.linalg.norm(S))
        scaled = []
        for hb in (1e-1, 1e-2, 1e-3):
            k = PhysConstants(hbar=hb)
            res = implicit_residual(s, rhs(s, cfg, "berry", k), cfg, k)
            scaled.append(np.hypot(np.linalg.norm(res.rp), np.linalg.norm(res.rr)) / hb**2)
        spread = max(spread, max(scaled) / min(scaled))
    ok = record(9, spread <= 2.0, f"implicit residual / hbar^2 spread across hbar 1e-1..1e-3: factor {spread:.4f} (<= 2)")
    assert ok


def _spinor_vs_vector(hbar, T=50.0):
    cfg = FieldConfig.crossed_uniform(E0=(0, 1e-3, 0), H0=(0, 0, 0.05))
    S0 = np.array([1.0, 0.0, 0.0])
    s = ParticleState(0.0, Z3, np.array([0.5, 0.0, 0.2]), S0, spinor_from_spin(S0))
    tr = integrate(s, cfg, "berry", PhysConstants(hbar=hbar), T=T, tol=TOL, output_every=0.5)
    S_chi = np.array([spin_from_spinor(c / np.linalg.norm(c)) for c in tr.chi])
    return float(np.max(np.linalg.norm(S_chi - tr.S, axis=1)))


def test_criterion_10_spinor_vector_agreement():
    T = 50.0
    parts, ok = [], True
    for hb in (1e-2, 1e-3):
        dev = _spinor_vs_vector(hb, T)
        bound = C_SPINOR * (hb**2 + TOL) * T
        ok &= dev <= bound
        parts.append(f"hbar {hb:g}: max |dS| {dev:.3e} vs bound {bound:.3e}")
    record(10, ok, "; ".join(parts))
    assert ok


def test_criterion_11_gradient_checks():
    rng = np.random.default_rng(11)
    cfg_b = FieldConfig.custom(
        lambda r, t: (np.array([1e-3, -2e-3, 5e-4]), 0.05 * np.array([r[1] * r[2], r[0] * r[2], r[0] * r[1]]))
    )
    cfg_p = FieldConfig.coulomb(Z=-1.0, softening=0.5, H0=(0.02, -0.01, 0.05))
    k = PhysConstants(hbar=0.1)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        p, r = rng.uniform(-3, 3, 3), rng.uniform(-2, 2, 3)
        S = rng.normal(size=3)
        S /= np.linalg.norm(S)
        for cfg, dE, model in ((cfg_b, delta_E, "berry"), (cfg_p, delta_E_pauli, "pauli")):
            gp, gr = grad_delta_E(p, S, cfg, r, 0.0, k, model)
            f = sample(cfg, r)
            fd_p = np.array([(dE(p + h * e, S, f, k) - dE(p - h * e, S, f, k)) / (2 * h) for e in np.eye(3)])
            fd_r = np.array([(dE(p, S, sample(cfg, r + h * e), k) - dE(p, S, sample(cfg, r - h * e), k)) / (2 * h)
                             for e in np.eye(3)])
            worst = max(worst, np.linalg.norm(gp - fd_p) / np.linalg.norm(fd_p),
                        np.linalg.norm(gr - fd_r) / np.linalg.norm(fd_r))
    ok = record(11, worst <= 1e-6, f"analytic vs central-difference gradients: max rel error {worst:.2e} (<= 1e-6)")
    assert ok
