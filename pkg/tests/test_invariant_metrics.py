import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l2moduli import jets
from l2moduli.errors import InvalidInputError
from l2moduli.invariant_metrics import (
    character_integrals,
    complex_structure,
    frame_geometry,
    fs_gram_chart,
    gram_hermiticity_residual,
    hat_coefficients_closed,
    positivity_check,
    trivial_character_norms,
    verify_closure,
    verify_hermiticity,
)
from l2moduli.profiles import A_l2, FunctionProfile, get_profile
from l2moduli.quadrature import SphereQuadrature, frame_gram_quadrature

lams = st.floats(min_value=0.0, max_value=20.0)
LAM_GRID = np.geomspace(0.1, 10, 40)


@pytest.mark.parametrize("name", ["l2", "fs"])
@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 5.0])
def test_frame_geometry_structure(name, lam):
    g = frame_geometry(name, lam)
    assert g.gram[5, 5] == pytest.approx(get_profile(name).B(lam), rel=1e-12)
    assert g.gram[2, 5] == 0.0
    assert np.allclose(g.J @ g.J, -np.eye(6), atol=1e-13)
    assert np.linalg.eigvalsh(g.gram)[0] > 0
    assert np.max(np.abs(g.omega + g.omega.T)) < 1e-12


@given(lams, st.integers(0, 2**31 - 1))
def test_gram_is_J_invariant(lam, seed):
    g = frame_geometry("l2", lam)
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, 6))
    assert g.inner(g.J @ x, g.J @ y) == pytest.approx(g.inner(x, y), abs=1e-10 * (1 + abs(g.inner(x, y))))


def test_complex_structure_squares_to_minus_one():
    for lam in (0.0, 1.0, 5.0):
        Jm = complex_structure(lam)
        assert np.max(np.abs(Jm @ Jm + np.eye(6))) < 1e-13


@pytest.mark.parametrize("name", ["l2", "fs"])
def test_hermiticity(name):
    assert verify_hermiticity(name, LAM_GRID) < 1e-10
    for lam in (0.0, 2.0):
        assert gram_hermiticity_residual(frame_geometry(name, lam)) < 1e-12


def test_hermiticity_detects_perturbation():
    lam = 1.0
    res = verify_hermiticity("l2", [lam], perturb={"A3": 1 + 1e-3})
    A3 = frame_geometry("l2", lam).coefficients.A3
    # the second identity carries the defect as 4 dA3 / (1 + lam^2) = 2e-3 A3 at lam = 1
    assert res == pytest.approx(2e-3 * A3, rel=1e-6)


@pytest.mark.parametrize("name", ["l2", "fs"])
def test_closure(name):
    assert verify_closure(name, LAM_GRID) < 1e-8
    for lam in (0.5, 3.0):
        g = frame_geometry(name, lam)
        assert hat_coefficients_closed(g.coefficients)[3] == 0.0
        assert abs(g.hat[3]) < 1e-15
        assert np.allclose(g.hat, hat_coefficients_closed(g.coefficients), rtol=1e-12)


def test_closure_grid_must_avoid_origin():
    with pytest.raises(InvalidInputError):
        verify_closure("l2", [1e-4])


def test_positivity():
    grid = np.geomspace(1e-3, 100, 400)
    assert positivity_check("l2", grid)
    assert positivity_check("fs", grid)
    fast = FunctionProfile(lambda x: 1.0 / (jets.sqrt(1.0 + x * x) * (1.0 + x * x)), "decay-3")
    result = positivity_check(fast, grid)
    assert not result and result.first_failure > 1


def test_fs_closed_form_matches_chart_formula():
    for lam in (0.0, 1.0, 2.0):
        assert np.max(np.abs(fs_gram_chart(lam) - frame_geometry("fs", lam).gram)) < 1e-10


def test_fs_einstein_relation_scale():
    from l2moduli.curvature import ricci_generators

    lam = np.linspace(0, 10, 51)
    abar, _ = ricci_generators("fs", lam)
    assert np.max(np.abs(abar - 8 * get_profile("fs").A(lam))) < 1e-9


def test_characters():
    v = character_integrals()
    assert np.allclose(v, (7, 5, 3, 1), atol=1e-10)
    assert np.allclose(trivial_character_norms(), (1, 1), atol=1e-12)


@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_closed_form_gram_matches_quadrature(lam):
    quad = SphereQuadrature(64)
    G_quad = frame_gram_quadrature(lam, quad)
    G_closed = frame_geometry("l2", lam).gram
    assert G_quad[0, 0] / A_l2(lam) == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(G_quad - G_closed)) < 1e-8
