"""The eleven acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, collected in the terminal summary.
"""
import json
import math
import time

import numpy as np

from liebdarboux.algebra import S, S1, S1T, S2, S2T, S3, S3T, anticommutator, spin_generators
from liebdarboux.cases import (CaseModel, bound_state_indices, case_model, case_seed,
                               oracle_crosscheck)
from liebdarboux.cli import main
from liebdarboux.darboux import (apply_intertwiner, hermiticity_report, intertwining_residual,
                                 transformed_potential)
from liebdarboux.free_model import (cosh_profile, flat_band_solution, free_hamiltonian,
                                    gap_solution, gaussian_wave_profile, linear_profile,
                                    plane_wave_profile, poly_exp_profile, probe_solutions,
                                    sinh_profile, threshold_solution)
from liebdarboux.lattice import (TBParams, band_scan, bands_at, dispersion_regime1,
                                 dispersion_regime2, expanded_hamiltonian)
from liebdarboux.scattering import asymptotic_w, reflection_coefficient
from liebdarboux.spectral import Grid, case_spectrum, eigen_residual, norm_growth

CASES = {"I": CaseModel("I", eps=0.75), "II": CaseModel("II", eps=-0.25),
         "III": CaseModel("III", eps=0.75), "IV": CaseModel("IV", eps=0.5, ell=1.0)}
K0 = (math.pi / 2, math.pi / 2)


def test_criterion_01_spin_algebra(criterion):
    i = 1j
    z = np.zeros((3, 3), dtype=complex)

    def put(**e):
        m = z.copy()
        for k, v in e.items():
            m[int(k[1]), int(k[2])] = v
        return m

    expected = [put(e01=1, e10=1), put(e02=1, e20=1), put(e12=-i, e21=i),
               put(e01=-i, e10=i), put(e02=-i, e20=i), np.diag([1, -1, 1]).astype(complex),
               np.diag([1, -1, 0]).astype(complex)]
    g = spin_generators()
    ours = [g.s1, g.s2, g.s3, g.s1t, g.s2t, g.s, g.s3t]
    entrywise = all(np.array_equal(a, b) for a, b in zip(ours, expected))
    entrywise &= all(np.array_equal(a, b) for a, b in zip((S1, S2, S3, S1T, S2T, S, S3T), expected))
    anti = np.array_equal(anticommutator(S, S1), z) and np.array_equal(anticommutator(S, S1T), z)
    ok = entrywise and anti
    criterion(1, "spin matrices entry-exact; {S,S1}={S,S1t}=0 exactly", ok)
    assert ok


def test_criterion_02_free_catalog(criterion):
    m = hv = 1.0
    h = free_hamiltonian(m, hv)
    grid = Grid(-10.0, 10.0, 2001)
    sols = [gap_solution(0.75, m, hv, "odd_A"), gap_solution(-0.5, m, hv, "even_A"),
            threshold_solution(1, 1.0, 0.0, m, hv), threshold_solution(-1, 0.3, 1.2j, m, hv),
            gap_solution(0.0, m, hv, "odd_A"), gap_solution(0.0, m, hv, "even_A")]
    profiles = [cosh_profile(0.8), sinh_profile(0.5), gaussian_wave_profile(2.0, 1.5),
                plane_wave_profile(3.0), poly_exp_profile([0.5, -1.0, 0.25], -0.3),
                linear_profile(0.7, -0.2)]
    sols += [flat_band_solution(p, m, hv) for p in profiles]
    xs = grid.points()
    absolute = max(float(np.abs(h.apply(s, xs) - s.energy * np.asarray(s.value(xs))).max())
                   for s in sols)
    rel = max(eigen_residual(h, s, s.energy, grid) for s in sols)
    ok = absolute < 1e-10 and rel < 1e-10
    criterion(2, f"{len(sols)} free solutions solve H on [-10,10]", ok,
              f"max residual {absolute:.2e}")
    assert ok


def test_criterion_03_generic_vs_closed_form(criterion):
    devs = {k: oracle_crosscheck(p, (-8.0, 8.0), 1601) for k, p in CASES.items()}
    worst = max(devs.values())
    ok = worst < 1e-10
    criterion(3, "generic Darboux potential equals closed forms on [-8,8]", ok,
              ", ".join(f"{k} {v:.1e}" for k, v in devs.items()))
    assert ok


def test_criterion_04_hermiticity_dichotomy(criterion):
    base = free_hamiltonian(1.0, 1.0)
    flat = hermiticity_report(case_seed(CASES["I"]), base, (-10, 10), 2001, 1e-12)
    nonflat = hermiticity_report(case_seed(CaseModel("I", eps=0.75, nonflat=True)), base,
                                 (-10, 10), 2001, 1e-12)
    ok = flat.passed and nonflat.max_defect >= 0.1
    criterion(4, "flat-band seed Hermitian, non-flat seed not", ok,
              f"defects {flat.max_defect:.1e} vs {nonflat.max_defect:.3f}")
    assert ok


def test_criterion_05_intertwining(criterion):
    probes = probe_solutions(1.0, 1.0)
    base = free_hamiltonian(1.0, 1.0)
    rel, absolute = {}, {}
    for k, p in CASES.items():
        u = case_seed(p)
        rel[k] = max(intertwining_residual(base, u, psi, relative=True) for psi in probes)
        absolute[k] = max(intertwining_residual(base, u, psi) for psi in probes)
    ok = len(probes) >= 10 and max(rel.values()) < 1e-9
    criterion(5, f"(LH - H~L) psi vanishes for {len(probes)} probes per case", ok,
              "residual / max(1, sup|psi|): "
              + ", ".join(f"{k} {v:.1e}" for k, v in rel.items())
              + f"; largest absolute {max(absolute.values()):.1e}")
    assert ok


def test_criterion_06_spectra(criterion):
    expected = {"I": [-0.75, 0.0, 0.75], "II": [-0.25, 0.0], "III": [0.0], "IV": [0.5]}
    found, ok = {}, True
    for k, p in CASES.items():
        rep = case_spectrum(case_model(p))
        found[k] = rep.found_energies
        ok &= len(rep.found_energies) == len(expected[k])
        ok &= all(abs(a - b) <= 1e-8 for a, b in zip(sorted(rep.found_energies), expected[k]))
    tm2 = case_model(CASES["II"])
    n = norm_growth(tm2.missing_states[0], (10.0, 20.0, 40.0))
    growth = n[2] / n[1] - 1
    ok &= growth > 0.10 and 0 not in bound_state_indices(CASES["II"])
    criterion(6, "discrete spectra by shooting, no spurious states", ok,
              "; ".join(f"{k} {[round(e, 10) + 0.0 for e in v]}" for k, v in found.items())
              + f"; case II threshold state norm grows {100 * growth:.0f}% from L=20 to 40")
    assert ok


def test_criterion_07_reflectionless(criterion):
    energies = [1.1, 1.5, 2.0, 3.0, 5.0, -1.5]
    worst_r = worst_flux = worst_w = 0.0
    for p in CASES.values():
        tm = case_model(p)
        for e in energies:
            res = reflection_coefficient(tm, e)
            worst_r = max(worst_r, res.reflection)
            worst_flux = max(worst_flux, res.flux_defect)
        L = 30.0
        wm, wp = asymptotic_w(tm.seed, L, tol=1e-10)
        wm2, wp2 = asymptotic_w(tm.seed, 2 * L, tol=1e-10)
        worst_w = max(worst_w, float(np.abs(wm - wm2).max()), float(np.abs(wp - wp2).max()))
    ok = worst_r < 1e-6 and worst_flux < 1e-8 and worst_w < 1e-10
    criterion(7, f"|r|^2 ~ 0 at {len(energies)} energies per case", ok,
              f"max |r|^2 {worst_r:.1e}, flux defect {worst_flux:.1e}, W change {worst_w:.1e}")
    assert ok


def test_criterion_08_flat_band(criterion):
    t0 = time.perf_counter()
    worst_mid = worst_formula = 0.0
    for p, formula in ((TBParams(t3=0.3), dispersion_regime1),
                       (TBParams(1.0, 0.8, 0.6, 0.4), dispersion_regime2),
                       (TBParams(), dispersion_regime2)):
        surf = band_scan(p, 100)
        lo, hi = surf.middle_band_range()
        worst_mid = max(worst_mid, abs(lo), abs(hi))
        gx, gy = np.meshgrid(surf.kx, surf.ky, indexing="ij")
        _, ep, em = formula((gx, gy), p)
        worst_formula = max(worst_formula, float(np.abs(surf.bands[..., 2] - ep).max()),
                            float(np.abs(surf.bands[..., 0] - em).max()))
    spot1 = bands_at(K0, TBParams(t3=0.3))
    spot2 = bands_at((0.0, 0.0), TBParams())
    spots = (abs(spot1[2] - 1.2) < 1e-10 and abs(spot1[0] + 1.2) < 1e-10
             and abs(spot2[2] - 2.828427) < 1e-6 and abs(spot2[0] + 2.828427) < 1e-6)
    elapsed = time.perf_counter() - t0
    ok = worst_mid < 1e-12 and worst_formula < 1e-10 and spots and elapsed < 30
    criterion(8, "flat middle band and closed-form dispersions on 100x100 k", ok,
              f"|E0| {worst_mid:.1e}, formula {worst_formula:.1e}, "
              f"E(K0) {spot1[2]:.6f}, E(0) {spot2[2]:.6f}, {elapsed:.2f}s")
    assert ok


def test_criterion_09_expansion(criterion):
    p = TBParams(t3=0.1)
    errs = []
    for size in (0.01, 0.001):
        dk = (size / math.sqrt(2), size / math.sqrt(2))
        exact = bands_at((K0[0] + dk[0], K0[1] + dk[1]), p)
        approx = np.linalg.eigvalsh(expanded_hamiltonian(dk, p))
        errs.append(float(np.abs(exact - approx).max()))
    ratio = errs[0] / errs[1]
    ok = errs[0] < 1e-3 and 50 <= ratio <= 200
    criterion(9, "expanded Hamiltonian accurate to second order", ok,
              f"errors {errs[0]:.1e}, {errs[1]:.1e}; ratio {ratio:.1f}")
    assert ok


def test_criterion_10_case4_reduction(criterion):
    p = CASES["IV"]
    base = free_hamiltonian(p.m, p.hv)
    u = case_seed(p)
    xs = np.linspace(-10, 10, 2001)
    v = transformed_potential(u, base, xs)
    third = max(float(np.abs(v[:, 2, :]).max()), float(np.abs(v[:, :, 2]).max()))
    a = p.hv * p.nu * np.tanh(p.nu * xs)
    block = np.zeros((len(xs), 2, 2), dtype=complex)
    block[:, 0, 0], block[:, 1, 1] = -p.eps, p.eps
    block[:, 0, 1], block[:, 1, 0] = -1j * a, 1j * a
    block_dev = float(np.abs(v[:, :2, :2] - block).max())
    flat_leak = 0.0
    for prof in (gaussian_wave_profile(1.1, 1.3), poly_exp_profile([1.0, -0.5], -0.3),
                 cosh_profile(0.4), plane_wave_profile(2.0)):
        out = apply_intertwiner(u, flat_band_solution(prof, p.m, p.hv), xs)
        flat_leak = max(flat_leak, float(np.abs(out[:, :2]).max())
                        / max(1.0, float(np.abs(out).max())))
    ok = third < 1e-12 and block_dev < 1e-10 and flat_leak < 1e-12
    criterion(10, "case IV potential is blockdiag(h, 0); flat bands map to third component", ok,
              f"row/col 3 {third:.1e}, block {block_dev:.1e}, leak {flat_leak:.1e}")
    assert ok


def test_criterion_11_cli(criterion, tmp_path, capsys):
    runs = {
        "bands": ["bands", "--nk", "20", "--t3", "0.3"],
        "case": ["case", "--case", "II", "--n", "201"],
        "verify": ["verify", "--case", "I", "--n", "401"],
        "scatter": ["scatter", "--case", "III", "--energies", "1.1,2,5"],
        "spectrum": ["spectrum", "--case", "IV", "--format", "json"],
    }
    identical, codes = True, {}
    for name, argv in runs.items():
        outs = []
        for k in range(2):
            path = tmp_path / f"{name}{k}.out"
            codes.setdefault(name, []).append(main(argv + ["--out", str(path)]))
            outs.append(path.read_bytes())
        identical &= outs[0] == outs[1] and len(outs[0]) > 0
    success = all(c == [0, 0] for c in codes.values())
    config_errors = {name: main([name, "--case", "I", "--eps", "1.5"]) for name in runs
                     if name != "bands"}
    config_errors["bands"] = main(["bands", "--a", "-1"])
    verify_fail = main(["verify", "--case", "I", "--nonflat-seed", "--n", "401"])
    runtime = [main(["case", "--case", "IV", "--domain", "-15", "15"]),
               main(["verify", "--case", "IV", "--domain", "-15", "15"])]
    doc = json.loads((tmp_path / "spectrum0.out").read_text())
    capsys.readouterr()
    ok = (identical and success and all(c == 2 for c in config_errors.values())
          and verify_fail == 1 and runtime == [3, 3] and doc["schema"] == 1)
    criterion(11, "byte-identical CLI outputs and exit codes 0/1/2/3", ok,
              f"identical={identical}, config errors {sorted(set(config_errors.values()))}, "
              f"verify failure {verify_fail}, singular seed {runtime}")
    assert ok
