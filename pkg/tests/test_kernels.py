import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from liebdarboux import _closed_forms as cf
from liebdarboux import _dd, _pykernels, kernels
from liebdarboux.cases import CaseModel, case_seed
from liebdarboux.errors import AlgebraicDegeneracy

BACKENDS = [_pykernels]
if kernels.compiled_available():
    from liebdarboux import _ckernels
    BACKENDS.append(_ckernels)


def backend_ids(mod):
    return mod.BACKEND


def _probe_backend(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("LIEBDARBOUX_PURE", None)
    else:
        env["LIEBDARBOUX_PURE"] = env_value
    out = subprocess.run([sys.executable, "-c", "import liebdarboux; print(liebdarboux.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_pure_env_var_forces_fallback():
    assert _probe_backend("1") == "python"


def test_default_backend_prefers_compiled():
    expected = "cython" if kernels.compiled_available() else "python"
    assert _probe_backend(None) == expected
    assert _probe_backend("0") == expected


def random_stack(rng, n):
    return rng.normal(size=(n, 3, 3)) + 1j * rng.normal(size=(n, 3, 3))


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_inverse_det_matches_numpy(mod, rng):
    u = random_stack(rng, 200)
    inv, det = mod.inverse_det(u)
    assert np.abs(inv - np.linalg.inv(u)).max() < 1e-11
    assert np.abs(det - np.linalg.det(u)).max() < 1e-12


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_log_derivative_matches_numpy(mod, rng):
    u, du, d2u = (random_stack(rng, 50) for _ in range(3))
    w, w2, det = mod.log_derivative(u, du, d2u)
    inv = np.linalg.inv(u)
    assert np.abs(w - du @ inv).max() < 1e-10
    assert np.abs(w2 - d2u @ inv).max() < 1e-10
    assert mod.log_derivative(u, du)[1] is None


def test_backends_agree_bitwise_on_inverses(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    u = random_stack(rng, 100)
    a, b = BACKENDS
    assert np.array_equal(a.inverse_det(u)[0], b.inverse_det(u)[0])
    du = random_stack(rng, 100)
    assert np.array_equal(a.log_derivative(u, du)[0], b.log_derivative(u, du)[0])


def test_seed_inverse_in_cancellation_regime():
    # columns of the Case IV seed become nearly parallel; the double-double path
    # keeps the log-derivative accurate where plain float64 degrades
    p = CaseModel("IV", eps=0.5)
    u = case_seed(p)
    xs = np.linspace(-8, 8, 161)
    w = kernels.log_derivative(u.value(xs), u.derivative(xs))[0]
    w_np = np.asarray(u.derivative(xs)) @ np.linalg.inv(np.asarray(u.value(xs)))
    assert np.abs(w - w_np).max() < 1e-6
    assert np.all(np.isfinite(w))


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_eigvalsh3_matches_numpy(mod, rng):
    a = random_stack(rng, 500)
    h = a + np.conj(np.swapaxes(a, -1, -2))
    ref = np.linalg.eigvalsh(h)
    assert np.abs(mod.eigvalsh3(h) - ref).max() < 1e-12


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_eigvalsh3_degenerate_inputs(mod):
    assert np.array_equal(mod.eigvalsh3(np.zeros((3, 3))), np.zeros(3))
    assert np.allclose(mod.eigvalsh3(2.5 * np.eye(3)), [2.5] * 3, atol=1e-15)
    s1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    assert np.allclose(mod.eigvalsh3(s1), [-1, 0, 1], atol=1e-15)


entry = st.floats(-5, 5, allow_nan=False)


@given(st.lists(entry, min_size=9, max_size=9))
def test_eigvalsh3_property(vals):
    d = vals[:3]
    off = [complex(vals[3], vals[4]), complex(vals[5], vals[6]), complex(vals[7], vals[8])]
    h = np.array([[d[0], off[0], off[1]],
                  [np.conj(off[0]), d[1], off[2]],
                  [np.conj(off[1]), np.conj(off[2]), d[2]]])
    ref = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.abs(ref).max()))
    for mod in BACKENDS:
        assert np.abs(mod.eigvalsh3(h) - ref).max() < 1e-12 * scale


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_integrate_reduced_free_model(mod):
    # free reduced system at energy e in the gap: decaying exponential stays on its eigenvector
    m, hv, e = 1.0, 1.0, 0.6
    nu = np.sqrt(m * m - e * e) / hv
    y0 = np.array([1j * hv * nu / e, 1.0 + 0j])
    y, steps, _ = mod.integrate_reduced(cf.FREE, (m, hv), e, 0.0, 3.0, y0)
    assert steps > 0
    assert np.abs(y - y0 * np.exp(-nu * 3.0)).max() < 1e-10


def test_integrate_reduced_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    params = CaseModel("II", eps=-0.25).kernel_params
    y0 = np.array([1.0 + 0j, 0.3j])
    a = BACKENDS[0].integrate_reduced(cf.CASE2, params, 1.7, 12.0, -12.0, y0)
    b = BACKENDS[1].integrate_reduced(cf.CASE2, params, 1.7, 12.0, -12.0, y0)
    assert a[1] == b[1]
    assert np.abs(a[0] - b[0]).max() < 1e-12 * np.abs(a[0]).max()


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_integrate_reduced_degeneracy(mod):
    with pytest.raises(AlgebraicDegeneracy):
        mod.integrate_reduced(cf.FREE, (1.0, 1.0), 0.0, 0.0, 1.0, np.array([1.0, 0.0j]))


def _exact(x):
    return Fraction(x)


def test_two_sum_and_two_prod_are_error_free(rng):
    a = rng.normal(size=200) * 10.0 ** rng.integers(-8, 8, size=200)
    b = rng.normal(size=200) * 10.0 ** rng.integers(-8, 8, size=200)
    s, e = _dd.two_sum(a, b)
    p, f = _dd.two_prod(a, b)
    for i in range(200):
        assert _exact(s[i]) + _exact(e[i]) == _exact(a[i]) + _exact(b[i])
        assert _exact(p[i]) + _exact(f[i]) == _exact(a[i]) * _exact(b[i])


def test_dd_determinant_of_integer_matrix_exact():
    # 2**30-scale entries overflow the float64 mantissa in the cofactor products
    big = 2.0 ** 30
    u = np.array([[big + 1, big, 0], [big, big - 1, 0], [0, 0, 1]], dtype=complex)
    _, det = _dd.adjugate_det(u)
    assert det.to_complex() == -1.0


def test_benchmark_smoke(capsys):
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "benchmarks"))
    try:
        import bench_kernels
    finally:
        sys.path.pop(0)
    assert bench_kernels.main(["--quick", "--repeat", "1"]) == 0
    out = capsys.readouterr().out
    for name in ("log_derivative", "inverse_det", "eigvalsh3", "integrate_reduced"):
        assert name in out
