import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semidirac.constants import PhysConstants, energy
from semidirac.dynamics import (
    ParticleState,
    RhsModel,
    as_model,
    berry_curvature,
    delta_E,
    delta_E_pauli,
    energy_monitor,
    grad_delta_E,
    implicit_residual,
    integrate,
    intrinsic_angular_momentum,
    rhs,
)
from semidirac.errors import NumericalError, PreconditionError
from semidirac.fields import FieldConfig, FieldSample, sample
from semidirac.fw_verify import SIGMA, berry_curvature_closed
from semidirac.spin import delta_E_matrix, spinor_from_spin

Z3 = np.zeros(3)
vec = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3).map(np.array)
unit = vec.filter(lambda v: np.linalg.norm(v) > 1e-2).map(lambda v: v / np.linalg.norm(v))
fld = st.lists(st.floats(-0.1, 0.1, allow_nan=False), min_size=3, max_size=3).map(np.array)


def _nonuniform_H():
    # curl-free, divergence-free H = grad(x y z) plus a uniform E
    return FieldConfig.custom(
        lambda r, t: (np.array([1e-3, -2e-3, 5e-4]), 0.05 * np.array([r[1] * r[2], r[0] * r[2], r[0] * r[1]]))
    )


def test_energy_examples():
    assert energy(Z3) == 1.0
    assert energy([1.0, 0, 0]) == pytest.approx(1.414214, abs=1e-6)
    assert energy([3.0, 4.0, 0]) == pytest.approx(5.099020, abs=1e-6)


def test_model_aliases():
    assert as_model("berry") is RhsModel.BERRY_FULL
    assert as_model("pauli_canonical") is RhsModel.PAULI_CANONICAL
    with pytest.raises(PreconditionError):
        as_model("dirac")


def test_curvature_examples():
    assert np.allclose(berry_curvature(Z3, [0, 0, 1]), [0, 0, -0.5])
    assert np.allclose(berry_curvature([1.0, 0, 0], [1, 0, 0]), [-0.25, 0, 0])


def test_curvature_matches_matrix_expectation():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = rng.uniform(-5, 5, 3)
        chi = rng.normal(size=2) + 1j * rng.normal(size=2)
        chi /= np.linalg.norm(chi)
        S = np.einsum("a,kab,b->k", chi.conj(), SIGMA, chi).real
        F_mat = berry_curvature_closed(p)
        expect = np.einsum("a,kab,b->k", chi.conj(), F_mat, chi).real
        assert np.allclose(berry_curvature(p, S), expect, atol=1e-10, rtol=1e-10)


def test_delta_E_examples():
    H = FieldSample(Z3, np.array([0, 0, 0.1]))
    assert delta_E(Z3, [0, 0, 1], H) == pytest.approx(-0.05)
    assert delta_E([1, 2, 3], [0, 0, 1], FieldSample(Z3, Z3)) == 0.0
    # p = (1,0,0), S = z:  p x (p x S) = -z
    Lz = -1 / (2 * np.sqrt(2) * (np.sqrt(2) + 1))
    expect = -(1 / (2 * np.sqrt(2))) * 0.1 - (1 / np.sqrt(2)) * Lz * 0.1
    assert delta_E([1.0, 0, 0], [0, 0, 1], H) == pytest.approx(expect, rel=1e-14)
    assert intrinsic_angular_momentum([1.0, 0, 0], [0, 0, 1])[2] == pytest.approx(Lz)


@settings(max_examples=50, deadline=None)
@given(vec, unit, fld)
def test_delta_E_is_matrix_expectation(p, S, H):
    k = PhysConstants(hbar=0.2)
    f = FieldSample(Z3, H)
    chi = spinor_from_spin(S)
    expect = np.vdot(chi, delta_E_matrix(p, f, k) @ chi).real
    assert delta_E(p, S, f, k) == pytest.approx(expect, abs=1e-13)


def _fd_grad(fun, x, h=1e-6):
    return np.array([(fun(x + h * e) - fun(x - h * e)) / (2 * h) for e in np.eye(3)])


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@settings(max_examples=40, deadline=None)
@given(vec, unit, vec)
def test_grad_berry_matches_differences(p, S, r):
    cfg = _nonuniform_H()
    k = PhysConstants(hbar=0.1)
    gp, gr = grad_delta_E(p, S, cfg, r, 0.0, k)
    f = sample(cfg, r)
    fd_p = _fd_grad(lambda q: delta_E(q, S, f, k), p)
    fd_r = _fd_grad(lambda x: delta_E(p, S, sample(cfg, x), k), r)
    if np.linalg.norm(fd_p) > 1e-9:
        assert _rel(gp, fd_p) <= 1e-6
    if np.linalg.norm(fd_r) > 1e-9:
        assert _rel(gr, fd_r) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(vec, unit, vec)
def test_grad_pauli_matches_differences(p, S, r):
    cfg = FieldConfig.coulomb(Z=-1.0, softening=0.5, H0=(0.02, -0.01, 0.05))
    k = PhysConstants(hbar=0.1)
    gp, gr = grad_delta_E(p, S, cfg, r, 0.0, k, "pauli")
    f = sample(cfg, r)
    fd_p = _fd_grad(lambda q: delta_E_pauli(q, S, f, k), p)
    fd_r = _fd_grad(lambda x: delta_E_pauli(p, S, sample(cfg, x), k), r)
    if np.linalg.norm(fd_p) > 1e-9:
        assert _rel(gp, fd_p) <= 1e-6
    if np.linalg.norm(fd_r) > 1e-9:
        assert _rel(gr, fd_r) <= 1e-6


def test_grad_trivial_cases():
    cfg = FieldConfig.uniform(H0=(0, 0.1, 0.2))
    _, gr = grad_delta_E([1, 2, 0], [0, 0, 1], cfg, [3, 1, 2])
    assert not np.any(gr)
    gp, gr = grad_delta_E([1, 2, 0], [0, 0, 1], FieldConfig.uniform(E0=(1, 0, 0)), Z3)
    assert not np.any(gp) and not np.any(gr)


def test_rhs_zero_fields():
    s = ParticleState(0.0, Z3, np.array([1.0, 2.0, -1.0]), np.array([0, 0, 1.0]))
    for model in RhsModel:
        d = rhs(s, FieldConfig.uniform(), model)
        assert np.allclose(d.rdot, s.p / energy(s.p))
        assert not np.any(d.pdot) and not np.any(d.Sdot)


@settings(max_examples=40, deadline=None)
@given(vec, vec, unit)
def test_models_agree_at_zero_hbar(r, p, S):
    cfg = FieldConfig.coulomb(Z=0.7, softening=0.3, H0=(0.01, 0.03, -0.02))
    k = PhysConstants(hbar=0.0)
    s = ParticleState(0.0, r, p, S)
    a = rhs(s, cfg, "berry", k)
    b = rhs(s, cfg, "classical", PhysConstants(hbar=0.5))
    c = rhs(s, cfg, "pauli", k)
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x, y)
        assert np.array_equal(x, z)


def test_spin_hall_anomaly_example():
    s = ParticleState(0.0, Z3, np.array([0.1, 0, 0]), np.array([0, 0, 1.0]))
    cfg = FieldConfig.uniform(E0=(1e-4, 0, 0))
    d = rhs(s, cfg, "berry")
    anomaly = d.rdot - s.p / energy(s.p)
    assert anomaly[1] == pytest.approx(-4.9259e-5, rel=1e-4)
    assert berry_curvature(s.p, s.S)[2] == pytest.approx(-0.49259, rel=1e-4)
    # non-relativistic limit
    s0 = ParticleState(0.0, Z3, np.array([1e-6, 0, 0]), np.array([0, 0, 1.0]))
    d0 = rhs(s0, cfg, "berry")
    assert np.allclose(d0.rdot - s0.p / energy(s0.p), [0, -5e-5, 0], rtol=1e-6, atol=1e-15)


def test_pauli_spin_orbit_velocity_coefficient():
    s = ParticleState(0.0, Z3, np.array([1e-6, 0, 0]), np.array([0, 0, 1.0]))
    cfg = FieldConfig.uniform(E0=(1e-4, 0, 0))
    d = rhs(s, cfg, "pauli")
    expect = -(1 / 4) * np.cross(s.S, cfg.E0)
    assert np.allclose(d.rdot - s.p / energy(s.p), expect, rtol=1e-6, atol=1e-15)


def test_anomalous_velocity_linear_in_hbar():
    cfg = FieldConfig.crossed_uniform(E0=(1e-3, 0, 2e-3), H0=(0, 0.02, 0.05))
    s = ParticleState(0.0, Z3, np.array([0.4, -0.3, 0.2]), np.array([0.0, 0.6, 0.8]))
    vals = []
    for hb in (1e-1, 1e-2, 1e-3):
        k = PhysConstants(hbar=hb)
        gp, _ = grad_delta_E(s.p, s.S, cfg, s.r, 0.0, k)
        anom = rhs(s, cfg, "berry", k).rdot - gp - rhs(s, cfg, "classical", k).rdot
        vals.append(anom / hb)
    assert _rel(vals[1], vals[0]) <= 1e-3
    assert _rel(vals[2], vals[0]) <= 1e-3


def test_implicit_residual_cases():
    s = ParticleState(0.0, np.array([0.5, 0.1, 0.0]), np.array([0.4, -0.3, 0.2]), np.array([0.0, 0.6, 0.8]))
    cfg = FieldConfig.coulomb(Z=1.0, softening=0.2)
    k = PhysConstants(hbar=0.3)
    res = implicit_residual(s, rhs(s, cfg, "berry", k), cfg, k)
    assert np.linalg.norm(res.rp) <= 1e-12 and np.linalg.norm(res.rr) <= 1e-12

    k0 = PhysConstants(hbar=0.0)
    cfgH = FieldConfig.crossed_uniform(E0=(1e-2, 0, 0), H0=(0, 0, 0.1))
    res = implicit_residual(s, rhs(s, cfgH, "classical", k0), cfgH, k0)
    # zero up to the different summation order
    assert np.max(np.abs(res.rp)) <= 1e-16 and np.max(np.abs(res.rr)) <= 1e-16

    scaled = []
    for hb in (1e-1, 1e-2, 1e-3):
        k = PhysConstants(hbar=hb)
        res = implicit_residual(s, rhs(s, cfgH, "berry", k), cfgH, k)
        scaled.append(np.hypot(np.linalg.norm(res.rp), np.linalg.norm(res.rr)) / hb**2)
    assert max(scaled) / min(scaled) <= 2.0


def test_free_motion():
    s = ParticleState(0.0, Z3, np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    tr = integrate(s, FieldConfig.uniform(), "berry", T=10.0)
    assert np.allclose(tr.r[-1], [10 / np.sqrt(2), 0, 0], atol=1e-10, rtol=0)
    assert tr.t[-1] == 10.0


def test_larmor_radius():
    H, p = 0.01, 0.01
    cfg = FieldConfig.uniform(H0=(0, 0, H))
    s = ParticleState(0.0, Z3, np.array([p, 0, 0]), np.array([0, 0, 1.0]))
    period = 2 * np.pi * energy(s.p) / H
    tr = integrate(s, cfg, "classical", T=period, output_every=period / 200)
    R = p / H
    centre = np.array([0.0, -R, 0.0])
    radii = np.linalg.norm(tr.r - centre, axis=1)
    assert np.max(np.abs(radii / R - 1)) <= 1e-6


def test_rk4_fourth_order():
    cfg = FieldConfig.crossed_uniform(E0=(0, 0.02, 0), H0=(0, 0, 0.3))
    s = ParticleState(0.0, Z3, np.array([0.8, 0.0, 0.3]), np.array([1.0, 0, 0]))
    k = PhysConstants(hbar=0.05)
    T = 20.0
    ref = integrate(s, cfg, "berry", k, T=T, tol=1e-13, atol=1e-15)
    y_ref = np.concatenate([ref.r[-1], ref.p[-1], ref.S[-1]])
    errs = []
    for dt in (0.2, 0.1):
        tr = integrate(s, cfg, "berry", k, scheme="rk4_fixed", T=T, dt=dt)
        errs.append(np.linalg.norm(np.concatenate([tr.r[-1], tr.p[-1], tr.S[-1]]) - y_ref))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.1)


def test_output_grid_and_determinism():
    cfg = FieldConfig.coulomb(Z=-0.5, softening=0.1, H0=(0, 0, 0.02))
    s = ParticleState(0.0, np.array([1.0, 0, 0]), np.array([0, 0.6, 0]), np.array([0, 0, 1.0]))
    a = integrate(s, cfg, "berry", PhysConstants(hbar=0.1), T=5.0, output_every=0.5)
    b = integrate(s, cfg, "berry", PhysConstants(hbar=0.1), T=5.0, output_every=0.5)
    assert np.allclose(a.t, np.arange(11) * 0.5, rtol=0, atol=1e-12)
    for x, y in ((a.r, b.r), (a.p, b.p), (a.S, b.S), (a.energy, b.energy)):
        assert np.array_equal(x, y)


def test_integrate_preconditions():
    s = ParticleState(0.0, Z3, np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    cfg = FieldConfig.uniform()
    with pytest.raises(PreconditionError):
        integrate(s, cfg, T=0.0)
    with pytest.raises(PreconditionError):
        integrate(s, cfg, scheme="rk4_fixed", T=1.0, dt=0.3)
    with pytest.raises(PreconditionError):
        integrate(s, cfg, scheme="rk4_fixed", T=1.0, dt=0.1, output_every=0.25)
    with pytest.raises(PreconditionError):
        integrate(s, cfg, scheme="leapfrog", T=1.0)


def test_nan_detection():
    cfg = FieldConfig.custom(lambda r, t: (np.array([np.nan if t > 0.5 else 0.0, 0, 0]), Z3))
    s = ParticleState(0.0, Z3, np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    with pytest.raises(NumericalError):
        integrate(s, cfg, T=1.0)
    with pytest.raises(NumericalError):
        integrate(s, cfg, scheme="rk4_fixed", T=1.0, dt=0.1)


def test_step_underflow():
    # a field that jumps at t = 0.5 forces ever smaller steps
    cfg = FieldConfig.custom(lambda r, t: (np.array([1e3 if t > 0.5 else 0.0, 0, 0]), Z3))
    s = ParticleState(0.0, Z3, np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
    with pytest.raises(NumericalError, match="underflow|step"):
        integrate(s, cfg, T=1.0, dt_min=1e-3)


def test_energy_monitor_availability():
    s = ParticleState(0.0, np.array([1.0, 0, 0]), np.array([0, 0.5, 0]), np.array([0, 0, 1.0]))
    assert energy_monitor(s, _nonuniform_H()) is None
    tr = integrate(s, _nonuniform_H(), T=1.0)
    assert tr.energy is None
    cfg = FieldConfig.coulomb(Z=1.0, softening=0.1)
    assert energy_monitor(s, cfg) == pytest.approx(energy(s.p) + 1 / np.sqrt(1.01))


def test_energy_conserved_in_electrostatic_field():
    cfg = FieldConfig.coulomb(Z=-0.5, softening=0.05)
    s = ParticleState(0.0, np.array([2.0, 0, 0]), np.array([0, 0.4, 0.1]), np.array([0.6, 0, 0.8]))
    tr = integrate(s, cfg, "berry", PhysConstants(hbar=0.1), T=100.0)
    drift = np.max(np.abs(tr.energy - tr.energy[0])) / abs(tr.energy[0])
    assert drift <= 10 * 1e-10


def test_energy_rate_orbital_part_second_order():
    # splitting dH/dt into the spin-exchange part and the rest
    cfg = FieldConfig.coulomb(Z=-0.5, softening=0.05, H0=(0, 0.02, 0.05))
    s = ParticleState(0.0, np.array([2.0, 0, 0]), np.array([0, 0.4, 0.1]), np.array([0.6, 0, 0.8]))
    h = 1e-6
    orbital = []
    for hb in (1e-1, 1e-2):
        k = PhysConstants(hbar=hb)
        d = rhs(s, cfg, "berry", k)

        def E(dt, spin_only=False):
            if spin_only:
                return energy_monitor(ParticleState(0.0, s.r, s.p, s.S + dt * d.Sdot), cfg, "berry", k)
            return energy_monitor(
                ParticleState(dt, s.r + dt * d.rdot, s.p + dt * d.pdot, s.S + dt * d.Sdot), cfg, "berry", k
            )

        total = (E(h) - E(-h)) / (2 * h)
        spin = (E(h, True) - E(-h, True)) / (2 * h)
        orbital.append(abs(total - spin))
    assert orbital[0] / orbital[1] == pytest.approx(100, rel=0.3)
