import json

import numpy as np
import pytest

from l2moduli.dynamics import (
    FlowState,
    conserved_quantities,
    coordinate_jacobian,
    euler_to_su2,
    frame_metric,
    frame_metric_formula,
    geodesic_flow,
    hamiltonian_field_symplectic,
    hamiltonian_flow,
    hamiltonian_flow_coordinates,
    hamiltonian_vector_field,
    metric_in_coordinates,
    random_state,
    state_distance,
    su2_to_euler,
    time_reversal_error,
)
from l2moduli.errors import ChartBoundaryError, EscapeError, InvalidInputError
from l2moduli.invariant_metrics import frame_geometry
from l2moduli.profiles import get_profile
from l2moduli.rational_maps import projective_residual, rotation_of, su2_exp

from conftest import random_unitary

L2 = get_profile("l2")
FS = get_profile("fs")


def _frame_gram(profile, x):
    Jinv = np.linalg.inv(coordinate_jacobian(x))
    return Jinv.T @ metric_in_coordinates(profile, x) @ Jinv


def test_euler_round_trip(rng):
    for _ in range(20):
        u = random_unitary(rng)
        for chart in (0, 1):
            back = euler_to_su2(su2_to_euler(u, chart), chart)
            assert projective_residual(u, back) < 1e-12


@pytest.mark.parametrize("profile", ["l2", "fs"])
def test_metric_on_gamma_matches_frame_geometry(profile):
    for lam in (0.3, 1.0, 4.0):
        x = np.array([0, 0, lam, 0.0, np.pi / 2, 0.0])  # any U: the frame is left invariant
        assert np.max(np.abs(_frame_gram(profile, x) - frame_geometry(profile, lam).gram)) < 1e-10


def test_two_frame_metric_routes_agree(rng):
    lv = rng.normal(size=(50, 3)) * 3
    for profile in (L2, FS):
        assert np.max(np.abs(frame_metric(profile, lv) - frame_metric_formula(profile, lv))) < 1e-12


def test_coordinate_metric_symmetric_positive_definite(rng):
    x = np.concatenate([rng.normal(size=(100, 3)) * 2, rng.uniform(0.2, 2.9, size=(100, 3))], axis=1)
    g = metric_in_coordinates(L2, x)
    assert np.max(np.abs(g - np.swapaxes(g, 1, 2))) < 1e-14
    assert np.min(np.linalg.eigvalsh(g)) > 0


def test_metric_is_invariant_under_both_actions(rng):
    for _ in range(10):
        s = random_state(rng)
        G = _frame_gram(L2, s.x)
        # left action U -> gU does not change frame components
        moved = FlowState.from_frame(random_unitary(rng) @ s.unitary, s.lamvec, s.frame_velocity())
        assert np.max(np.abs(_frame_gram(L2, moved.x) - G)) < 1e-8
        # right action rotates d lam and sigma together
        h = su2_exp(rng.normal(size=3))
        R = rotation_of(h)
        acted = FlowState.from_frame(s.unitary @ h.conj().T, R @ s.lamvec, s.frame_velocity())
        B = np.kron(np.eye(2), R)
        assert np.max(np.abs(_frame_gram(L2, acted.x) - B @ G @ B.T)) < 1e-8


def test_chart_boundary_and_switch(rng):
    with pytest.raises(ChartBoundaryError):
        metric_in_coordinates(L2, [0, 0, 1, 0.1, 0.0, 0.2])
    with pytest.raises(InvalidInputError):
        metric_in_coordinates(L2, [0, 0, 1])
    s = random_state(rng)
    t = s.switched()
    assert t.chart != s.chart and state_distance(s, t) < 1e-12
    assert state_distance(FlowState.from_json(s.to_json()), s) == 0


def test_random_geodesics_conserve_energy_and_charges():
    rng = np.random.default_rng(2024)
    for _ in range(3):
        tr = geodesic_flow(L2, random_state(rng), 1.0)
        de, dq = tr.drift()
        assert de < 1e-6 and dq < 1e-5
        assert conserved_quantities(L2, tr.final).finite


def test_time_reversal():
    s = random_state(np.random.default_rng(77))
    assert time_reversal_error(L2, s, 1.0) < 1e-5


def test_radial_geodesic_keeps_direction():
    s = FlowState.from_frame(np.eye(2), [0, 0, 1.0], [0, 0, 0.5, 0, 0, 0])
    tr = geodesic_flow(L2, s, 1.0)
    lam = tr.coords[:, :3]
    direction = lam / np.linalg.norm(lam, axis=1)[:, None]
    assert np.max(np.abs(direction - [0, 0, 1])) < 1e-6
    assert lam[-1, 2] > 1.2


def test_rotation_at_identity_stays_in_fixed_set():
    s = FlowState.from_frame(np.eye(2), [0, 0, 0.0], [0, 0, 0, 0, 0, 1.0])
    tr = geodesic_flow(L2, s, 1.0)
    assert np.max(np.linalg.norm(tr.coords[:, :3], axis=1)) < 1e-6


def test_fs_energy(rng):
    tr = geodesic_flow(FS, random_state(rng), 1.0)
    assert tr.drift()[0] < 1e-8


def test_fast_radial_geodesic_escapes():
    s = FlowState.from_frame(np.eye(2), [0, 0, 1.0], [0, 0, 3.0, 0, 0, 0])
    with pytest.raises(EscapeError):
        geodesic_flow(L2, s, 5.0)


def test_geodesic_csv_and_validation(rng):
    tr = geodesic_flow(FS, random_state(rng), 0.05, sample_every=10)
    lines = tr.to_csv().splitlines()
    assert lines[0].startswith("# profile")
    header = [line for line in lines if not line.startswith("#")][0]
    assert header.startswith("t,lam1,lam2,lam3,phi,theta,psi,chart,energy")
    assert len(tr.times) == 6
    with pytest.raises(InvalidInputError):
        geodesic_flow(FS, random_state(rng), 1.0, dt=0)


# -- Hamiltonian flows ------------------------------------------------------
@pytest.mark.parametrize("profile", ["l2", "fs"])
def test_spin_rate_forms_agree(profile):
    for lam in np.geomspace(0.1, 10, 12):
        dH = lam  # H = lam^2 / 2
        w = hamiltonian_vector_field(profile, dH, lam, "B")
        assert hamiltonian_vector_field(profile, dH, lam, "A") == pytest.approx(w, rel=1e-10)
        assert hamiltonian_vector_field(profile, dH, lam, "hat") == pytest.approx(w, rel=1e-10)
        X = hamiltonian_field_symplectic(profile, dH, lam)
        assert np.max(np.abs(X[:5])) < 1e-10 * abs(w)
        assert X[5] == pytest.approx(w, rel=1e-10)
    assert hamiltonian_vector_field(profile, 0.0, 2.0) == 0.0


@pytest.mark.parametrize("profile", [L2, FS])
def test_b_identity(profile):
    lam = np.linspace(0.1, 10, 200)
    a, a1 = profile.derivatives(lam, 1)
    lhs = (1 + 2 * lam**2) * a + (lam + lam**3) * a1
    assert np.max(np.abs(lhs / (4 * profile.B(lam)) - 1)) < 1e-10


def test_hamiltonian_flow_exact(rng):
    u0 = random_unitary(rng)
    lamvec = np.array([0.6, 0.0, 0.8])
    tr = hamiltonian_flow(L2, lambda l: l * l / 2, lambda l: l, u0, lamvec, T=10.0, samples=501)
    lam = np.linalg.norm(tr.lamvec, axis=1)
    assert np.var(lam) < 1e-12
    assert np.max(np.abs(tr.hamiltonian - 0.5)) < 1e-10
    # after one period [U] is back where it started
    back = hamiltonian_flow(L2, lambda l: l * l / 2, lambda l: l, u0, lamvec, T=tr.period, samples=2)
    assert projective_residual(back.unitaries[-1], u0) < 1e-10
    half = hamiltonian_flow(L2, lambda l: l * l / 2, lambda l: l, u0, lamvec, T=tr.period / 2, samples=2)
    assert projective_residual(half.unitaries[-1], u0) > 0.1


def test_constant_hamiltonian_freezes(rng):
    u0 = random_unitary(rng)
    tr = hamiltonian_flow(L2, lambda l: 3.0, lambda l: 0.0, u0, [1.0, 0, 0], T=5.0)
    assert tr.omega == 0 and np.isinf(tr.period)
    assert all(projective_residual(u, u0) < 1e-14 for u in tr.unitaries)


def test_hamiltonian_flow_coordinates_match_exact(rng):
    u0 = random_unitary(rng)
    lamvec = np.array([0.0, 1.0, 0.0])
    s = FlowState.from_frame(u0, lamvec, np.zeros(6))
    end = hamiltonian_flow_coordinates(L2, lambda l: l, s, T=1.0)
    exact = hamiltonian_flow(L2, lambda l: l * l / 2, lambda l: l, u0, lamvec, T=1.0, samples=2)
    assert projective_residual(end.unitary, exact.unitaries[-1]) < 1e-9
    assert np.allclose(end.lamvec, lamvec)


def test_initial_state_json():
    text = json.dumps({"lam": [0, 0, 1], "frame_velocity": [0, 0, 0.5, 0, 0, 0]})
    s = FlowState.from_json(text)
    assert np.allclose(s.frame_velocity(), [0, 0, 0.5, 0, 0, 0])
