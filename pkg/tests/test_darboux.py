import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liebdarboux.cases import CaseModel, case_seed
from liebdarboux.darboux import (apply_intertwiner, darboux_transform, hermiticity_report,
                                 intertwining_residual, inverse_mp, l2_norm, log_derivative,
                                 log_derivative_mp, mapped_state, missing_states, normalized,
                                 normalized_determinant, regularity_scan, seed_determinant,
                                 seed_matrix, transformed_potential)
from liebdarboux.errors import InconsistentLabels, SingularSeed
from liebdarboux.free_model import (chiral_partner, cosh_profile, flat_band_solution,
                                    free_hamiltonian, gap_solution, gaussian_wave_profile,
                                    poly_exp_profile, probe_solutions, sinh_profile)
from liebdarboux.spectral import Grid, eigen_residual

XS = np.linspace(-10, 10, 2001)
CASES = [CaseModel("I", eps=0.75), CaseModel("II", eps=-0.25), CaseModel("III", eps=0.75),
         CaseModel("IV", eps=0.5)]
IDS = ["I", "II", "III", "IV"]


def case1_columns(m=1.0, eps=0.75, hv=1.0):
    nu = math.sqrt(m * m - eps * eps) / hv
    first = gap_solution(eps, m, hv, "odd_A").scaled(1 / (hv * nu))
    return first, flat_band_solution(cosh_profile(nu), m, hv), chiral_partner(first)


def test_seed_columns_follow_free_derivatives():
    u = case_seed(CASES[0])
    h = 1e-6
    for x in (-2.0, 0.3, 4.0):
        num = (u.value(x + h) - u.value(x - h)) / (2 * h)
        assert np.abs(num - u.derivative(x)).max() < 1e-7 * max(1.0, np.abs(u.value(x)).max())


def test_seed_energies_and_labels():
    cols = case1_columns()
    u = seed_matrix(*cols, energies=(0.75, "flat-band", -0.75))
    assert u.energies == (0.75, 0.0, -0.75)
    assert seed_matrix(*cols).energies == (0.75, 0.0, -0.75)
    with pytest.raises(InconsistentLabels):
        seed_matrix(*cols, energies=(0.5, 0.0, -0.75))
    with pytest.raises(InconsistentLabels):
        seed_matrix(*cols, energies=(0.75, 0.3, -0.75))
    with pytest.raises(ValueError):
        seed_matrix(*cols, energies=(0.75, 0.0))


def test_case1_determinant_at_origin():
    # columns at x=0 are (0, i e, -m)/(hv nu), (m, 0, 0), (0, -i e, -m)/(hv nu)
    for m, eps, hv in ((1.0, 0.75, 1.0), (1.2, 0.5, 0.7)):
        u = case_seed(CaseModel("I", m=m, eps=eps, hv=hv))
        assert seed_determinant(u, 0.0) == pytest.approx(2j * eps * m ** 2 / (m * m - eps * eps),
                                                         rel=1e-14)
    assert seed_determinant(case_seed(CASES[0]), 0.0) == pytest.approx(3.428571428571j, rel=1e-12)


@pytest.mark.parametrize("x", [-3.0, 0.0, 0.4, 2.5])
def test_case4_determinant_closed_form(x):
    p = CaseModel("IV", m=1.2, eps=0.5, hv=0.7, ell=1.3)
    expected = -1j * p.m * p.eps * p.ell * math.cosh(p.nu * x) / p.nu
    assert seed_determinant(case_seed(p), x) == pytest.approx(expected, rel=1e-11)


def test_repeated_column_has_zero_determinant():
    first = case1_columns()[0]
    assert seed_determinant(seed_matrix(first, first, first), 0.3) == 0
    assert normalized_determinant(seed_matrix(first, first, first), 0.3) == 0


@pytest.mark.parametrize("p", CASES, ids=IDS)
def test_case_seeds_regular(p):
    rep = regularity_scan(case_seed(p))
    assert rep.passed and bool(rep)
    assert 0 < rep.min_ratio <= 1


def test_sinh_flat_column_is_singular_at_origin():
    first = case1_columns()[0]
    fb = flat_band_solution(sinh_profile(math.sqrt(1 - 0.75 ** 2)), 1.0, 1.0)
    u = seed_matrix(first, fb, chiral_partner(first))
    rep = regularity_scan(u)
    assert not rep.passed
    assert rep.argmin_ratio == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(SingularSeed):
        log_derivative(u, np.array([-0.5, 0.0, 0.5]))


def test_intertwiner_annihilates_seed_columns():
    for p in CASES:
        u = case_seed(p)
        xs = np.linspace(-5, 5, 101)
        for col in u.columns:
            lpsi = apply_intertwiner(u, col, xs)
            scale = max(1.0, float(np.abs(np.asarray(col.derivative(xs))).max()))
            assert np.abs(lpsi).max() < 1e-12 * scale


def test_case4_flat_band_maps_to_third_component():
    p = CASES[3]
    u = case_seed(p)
    xs = np.linspace(-6, 6, 241)
    for prof in (gaussian_wave_profile(1.1, 1.3, 0.2), poly_exp_profile([1.0, -0.5], -0.3),
                 cosh_profile(0.4)):
        lpsi = apply_intertwiner(u, flat_band_solution(prof, p.m, p.hv), xs)
        expected = -p.hv * (prof.chi_double_prime(xs) - p.nu0 ** 2 * prof.chi(xs))
        scale = max(1.0, float(np.abs(expected).max()))
        assert np.abs(lpsi[:, :2]).max() < 1e-12 * scale
        assert np.abs(lpsi[:, 2] - expected).max() < 1e-11 * scale


def test_case4_gap_state_mapping():
    p = CaseModel("IV", m=1.1, eps=0.5, hv=0.8)
    u = case_seed(p)
    e2 = -0.3
    nu2 = math.sqrt(p.m ** 2 - e2 ** 2) / p.hv
    psi = gap_solution(e2, p.m, p.hv, "odd_A").scaled(1 / (p.hv * nu2))
    xs = np.linspace(-5, 5, 201)
    lpsi = apply_intertwiner(u, psi, xs)
    ch = np.cosh(nu2 * xs)
    first = e2 * (p.eps - e2) / (p.hv ** 2 * nu2) * ch
    second = 1j * (e2 / p.hv) * (np.tanh(nu2 * xs) - p.nu / nu2 * np.tanh(p.nu * xs)) * ch
    scale = float(np.abs(ch).max())
    assert np.abs(lpsi[:, 0] - first).max() < 1e-11 * scale
    assert np.abs(lpsi[:, 1] - second).max() < 1e-11 * scale
    assert np.abs(lpsi[:, 2]).max() < 1e-11 * scale


def test_potentials_at_origin_and_far_out():
    base = free_hamiltonian(1.0, 1.0)
    from liebdarboux.algebra import S3, S3T, S1T
    v1 = transformed_potential(case_seed(CASES[0]), base, 0.0)
    expected = (1 - 0.4375) * S3
    assert np.abs(v1 - expected).max() < 1e-14
    v3 = transformed_potential(case_seed(CASES[2]), base, 0.0)
    assert np.abs(v3).max() < 1e-14
    v4 = transformed_potential(case_seed(CASES[3]), base, 0.0)
    assert np.abs(v4 + 0.5 * S3T).max() < 1e-14
    nu = CASES[3].nu
    x = 7.0
    far = transformed_potential(case_seed(CASES[3]), base, x)
    assert np.abs(far - (nu * math.tanh(nu * x) * S1T - 0.5 * S3T)).max() < 1e-10


@pytest.mark.parametrize("p", CASES, ids=IDS)
def test_missing_states_solve_transformed_model(p):
    tm = darboux_transform(free_hamiltonian(p.m, p.hv), case_seed(p))
    grid = Grid(-10, 10, 2001)
    for j, st_ in enumerate(tm.missing_states):
        pts = grid.points()
        scale = max(1.0, float(np.abs(np.asarray(st_.value(pts))).max()))
        assert eigen_residual(tm.model, st_, st_.energy, grid) < 1e-10 * scale, j


def test_missing_states_are_inverse_columns():
    u = case_seed(CASES[0])
    ms = missing_states(u)
    x = 0.7
    inv = np.linalg.inv(u.value(x))
    for j in range(3):
        assert np.abs(ms[j].value(x) - np.conj(inv[j, :])).max() < 1e-13


def test_case4_missing_state_is_sech():
    p = CASES[3]
    ms = missing_states(case_seed(p))[0]
    psi = normalized(ms, -40, 40)
    xs = np.linspace(-8, 8, 81)
    v = np.asarray(psi.value(xs))
    ref = math.sqrt(p.nu / 2) / np.cosh(p.nu * xs)
    phase = v[40, 1] / abs(v[40, 1])
    assert np.abs(v[:, 1] / phase - ref).max() < 1e-8
    assert np.abs(v[:, [0, 2]]).max() < 1e-12


def test_mapped_states_orthogonal_to_missing_states():
    p = CASES[0]
    u = case_seed(p)
    ms = missing_states(u)
    phi = mapped_state(u, flat_band_solution(gaussian_wave_profile(0.9, 1.2), p.m, p.hv))
    xs = np.linspace(-12, 12, 24001)
    lv = np.asarray(phi.value(xs))
    for j in range(3):
        mv = np.asarray(ms[j].value(xs))
        inner = np.trapezoid(np.sum(np.conj(lv) * mv, axis=1), xs)
        assert abs(inner) < 1e-6


@pytest.mark.parametrize("p", CASES, ids=IDS)
def test_intertwining_probe_solutions(p):
    u = case_seed(p)
    base = free_hamiltonian(p.m, p.hv)
    for psi in probe_solutions(p.m, p.hv):
        assert intertwining_residual(base, u, psi, relative=True) < 1e-9, psi.name


def test_mapped_state_is_eigenstate():
    p = CASES[1]
    tm = darboux_transform(free_hamiltonian(p.m, p.hv), case_seed(p))
    psi = mapped_state(tm.seed, gap_solution(0.4, p.m, p.hv, "even_A"))
    grid = Grid(-5, 5, 501)
    scale = max(1.0, float(np.abs(np.asarray(psi.value(grid.points()))).max()))
    assert eigen_residual(tm.model, psi, 0.4, grid) < 1e-10 * scale


def test_hermiticity_dichotomy():
    base = free_hamiltonian(1.0, 1.0)
    good = hermiticity_report(case_seed(CASES[0]), base)
    assert good.passed and good.max_defect < 1e-12
    bad = hermiticity_report(case_seed(CaseModel("I", eps=0.75, nonflat=True)), base)
    assert not bad.passed and bad.max_defect >= 0.1


def test_mp_log_derivative_agrees_and_extends():
    u = case_seed(CASES[3])
    assert np.abs(log_derivative_mp(u, 1.3) - log_derivative(u, 1.3)).max() < 1e-13
    inv = inverse_mp(u, 0.5)
    assert np.abs(inv @ u.value(0.5) - np.eye(3)).max() < 1e-13
    with pytest.raises(SingularSeed):
        log_derivative(u, 30.0)
    w = log_derivative_mp(u, 30.0)
    assert np.all(np.isfinite(w))


def test_l2_norm_and_normalized():
    p = CASES[2]
    st_ = missing_states(case_seed(p))[2]
    psi = normalized(st_, -30, 30)
    assert l2_norm(psi, -30, 30) == pytest.approx(1.0, rel=1e-10)
    # sech^2 integrates to 2/xi per unit amplitude squared
    ref = flat_band_solution(cosh_profile(0.0), 1.0, 1.0)
    assert l2_norm(ref, 0, 2) == pytest.approx(math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        normalized(ref.scaled(0.0), 0, 1)


@settings(max_examples=15)
@given(st.floats(0.05, 0.95), st.sampled_from([-1, 1]))
def test_case1_transform_property(frac, sign):
    p = CaseModel("I", eps=sign * frac)
    u = case_seed(p)
    base = free_hamiltonian(1.0, 1.0)
    assert hermiticity_report(u, base, domain=(-6, 6), n=241).passed
    psi = probe_solutions(1.0, 1.0)[5]
    assert intertwining_residual(base, u, psi, domain=(-6, 6), n=241, relative=True) < 1e-9
