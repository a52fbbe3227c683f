import dataclasses

import numpy as np
import pytest

from liebdarboux.algebra import S2
from liebdarboux.cases import CaseModel, bound_state_indices, case_model
from liebdarboux.darboux import mapped_state
from liebdarboux.errors import AlgebraicDegeneracy, NonAsymptoticPotential, Unsupported
from liebdarboux.free_model import (cosh_profile, flat_band_solution, free_hamiltonian,
                                    gap_solution)
from liebdarboux.spectral import (Grid, SpectrumReport, case_spectrum, check_asymptotic,
                                  decaying_vector, default_length, eigen_residual,
                                  eliminated_component, integrate_model, matching_function,
                                  norm_growth, reduce_to_two_components, shoot_bound_states)

SX = np.array([[0, 1], [1, 0]])


def test_grid():
    g = Grid(-1.0, 1.0, 5)
    assert g.h == 0.5
    assert np.array_equal(g.points(), [-1, -0.5, 0, 0.5, 1])
    with pytest.raises(ValueError):
        Grid(0, 1, 2)
    with pytest.raises(ValueError):
        Grid(1, 1, 10)


def test_report_matching():
    rep = SpectrumReport([0.0, 0.75 + 1e-10], [0, 0], expected=[0.75, 0.0])
    assert rep.matches()
    assert not dataclasses.replace(rep, expected=[0.0]).matches()
    assert not dataclasses.replace(rep, expected=[0.0, 0.7]).matches()


def test_free_reduction_recovers_c_component():
    m, hv, e = 1.0, 1.0, 0.6
    h = free_hamiltonian(m, hv)
    psi = gap_solution(e, m, hv, "even_A")
    for x in (-1.0, 0.5):
        v = psi.value(x)
        assert eliminated_component(h, e, x, v[:2]) == pytest.approx(1j * m * v[1] / e, abs=1e-15)
        assert eliminated_component(h, e, x, v[:2]) == pytest.approx(v[2], abs=1e-14)


def test_reduction_degenerates_at_flat_band():
    h = free_hamiltonian(1.0, 1.0)
    with pytest.raises(AlgebraicDegeneracy):
        reduce_to_two_components(h, 0.0, 1.0)
    with pytest.raises(AlgebraicDegeneracy):
        eliminated_component(h, 0.0, 1.0, [1, 1])


def test_case4_reduction_is_the_two_by_two_block():
    p = CaseModel("IV", eps=0.5, hv=0.8)
    model = case_model(p).model
    e = 0.3
    for x in (-2.0, 0.0, 1.5):
        block = np.asarray(model.potential(x))[:2, :2]
        expected = 1j / p.hv * SX @ (e * np.eye(2) - block)
        assert np.abs(reduce_to_two_components(model, e, x) - expected).max() < 1e-15


def test_reduction_needs_s1():
    h = dataclasses.replace(free_hamiltonian(1.0, 1.0), gamma=S2)
    with pytest.raises(Unsupported):
        reduce_to_two_components(h, 0.5, 0.0)


@pytest.mark.parametrize("tag,eps", [("I", 0.75), ("II", -0.25), ("III", 0.75), ("IV", 0.5)])
def test_reduction_fidelity(tag, eps, rng):
    tm = case_model(CaseModel(tag, eps=eps))
    e = 0.37
    psi = mapped_state(tm.seed, gap_solution(e, 1.0, 1.0, "odd_A"))
    for x in rng.uniform(-4, 4, size=20):
        a = reduce_to_two_components(tm.model, e, x)
        v, dv = psi.value(x), psi.derivative(x)
        scale = max(1.0, float(np.abs(v).max()), float(np.abs(dv).max()))
        assert np.abs(dv[:2] - a @ v[:2]).max() < 1e-11 * scale
        assert abs(eliminated_component(tm.model, e, x, v[:2]) - v[2]) < 1e-11 * scale


def test_eigen_residual_uses_analytic_derivatives():
    h = free_hamiltonian(1.0, 1.0)
    psi = flat_band_solution(cosh_profile(0.8), 1.0, 1.0)
    coarse = eigen_residual(h, psi, 0.0, Grid(-5, 5, 11))
    fine = eigen_residual(h, psi, 0.0, Grid(-5, 5, 10001))
    assert coarse < 1e-14 and fine < 1e-14
    assert eigen_residual(h, psi, 0.1, Grid(-5, 5, 11)) == pytest.approx(0.1, rel=1e-12)


def test_eigen_residual_of_missing_states():
    tm = case_model(CaseModel("I", eps=0.75))
    grid = Grid(-10, 10, 2001)
    for j, lam in enumerate(tm.seed.energies):
        assert eigen_residual(tm.model, tm.missing_states[j], lam, grid) < 1e-10


def test_non_asymptotic_potential():
    model = case_model(CaseModel("I", eps=0.75)).model
    with pytest.raises(NonAsymptoticPotential):
        check_asymptotic(model, 2.0)
    check_asymptotic(model, default_length(model))
    with pytest.raises(NonAsymptoticPotential):
        shoot_bound_states(model, (-0.9, 0.9), length=2.0)


def test_default_length():
    assert default_length(free_hamiltonian(2.0, 1.0)) == 15.0
    p = CaseModel("III", eps=0.75)
    assert default_length(case_model(p).model) == pytest.approx(30 / 1.25)
    nonflat = case_model(CaseModel("I", eps=0.75, nonflat=True)).model
    assert default_length(nonflat) == 40.0


def test_python_and_compiled_integration_agree():
    model = case_model(CaseModel("II", eps=-0.25)).model
    plain = dataclasses.replace(model, kernel=None)
    y0 = np.array([1.0, 0.4j])
    a = integrate_model(model, 0.6, 10.0, -3.0, y0)
    b = integrate_model(plain, 0.6, 10.0, -3.0, y0)
    assert np.abs(a - b).max() < 1e-10 * np.abs(a).max()


def test_decaying_vector_and_matching():
    model = case_model(CaseModel("IV", eps=0.5)).model
    assert decaying_vector(model, 1.5, 20.0, 1) is None
    v = decaying_vector(model, 0.2, 20.0, 1)
    assert v is not None and np.linalg.norm(v) == pytest.approx(1.0)
    assert abs(matching_function(model, 0.5, 30.0)) < 1e-8
    assert abs(matching_function(model, 0.2, 30.0)) > 1e-3
    assert np.isnan(matching_function(model, 1.5, 30.0))


def test_free_model_has_no_bound_states():
    rep = shoot_bound_states(free_hamiltonian(1.0, 1.0), (-0.99, 0.99), n_scan=100)
    assert rep.found_energies == []
    assert rep.degenerate == [0.0]


def test_norm_growth_distinguishes_states():
    tm = case_model(CaseModel("II", eps=-0.25))
    bound = norm_growth(tm.missing_states[bound_state_indices(tm.case)[0]])
    assert abs(bound[2] - bound[1]) < 1e-8 * bound[2]
    loose = norm_growth(tm.missing_states[0])
    assert loose[2] > 1.1 * loose[1]


SPECTRA = [
    (CaseModel("I", eps=0.75), [-0.75, 0.0, 0.75]),
    (CaseModel("II", eps=-0.25), [-0.25, 0.0]),
    (CaseModel("II", eps=0.25, mirror=True), [0.0, 0.25]),
    (CaseModel("III", eps=0.75), [0.0]),
    (CaseModel("IV", eps=0.5), [0.5]),
]


@pytest.mark.parametrize("p,expected", SPECTRA,
                         ids=["I", "II", "II-mirror", "III", "IV"])
def test_case_spectra(p, expected):
    rep = case_spectrum(case_model(p))
    assert rep.matches(1e-8)
    assert len(rep.found_energies) == len(expected)
    assert np.allclose(rep.found_energies, expected, atol=1e-8, rtol=0)


def test_case_spectrum_needs_case_model():
    tm = case_model(CaseModel("I", eps=0.75))
    with pytest.raises(ValueError):
        case_spectrum(dataclasses.replace(tm, case=None))
