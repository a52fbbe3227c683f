"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick] [--json PATH]

Each kernel runs on identical inputs in both backends; the largest output
difference is reported next to the timings.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from liebdarboux import _closed_forms as cf
from liebdarboux import _pykernels
from liebdarboux.cases import CaseModel, case_seed
from liebdarboux.kernels import compiled_available
from liebdarboux.lattice import TBParams, bloch_hamiltonian


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(quick: bool):
    n = 401 if quick else 1601
    xs = np.linspace(-8.0, 8.0, n)
    seed = case_seed(CaseModel("IV", eps=0.5))
    u = np.asarray(seed.value(xs), dtype=np.complex128)
    du = np.asarray(seed.derivative(xs), dtype=np.complex128)

    nk = 60 if quick else 200
    k = np.linspace(-np.pi / 2, np.pi / 2, nk)
    gx, gy = np.meshgrid(k, k, indexing="ij")
    h = bloch_hamiltonian((gx, gy), TBParams(1.0, 0.8, 0.6, 0.4, t3=0.2, muB=0.1))

    params = CaseModel("I", eps=0.75).kernel_params
    y0 = np.array([1.0 + 0j, 0.5j])
    length = 10.0 if quick else 30.0

    return {
        "log_derivative": lambda mod: mod.log_derivative(u, du)[0],
        "inverse_det": lambda mod: mod.inverse_det(u)[0],
        "eigvalsh3": lambda mod: mod.eigvalsh3(h),
        "integrate_reduced": lambda mod: np.asarray(
            mod.integrate_reduced(cf.CASE1, params, 1.5, length, -length, y0, 1e-11, 1e-13)[0]),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small inputs, for smoke tests")
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)

    backends = {"python": _pykernels}
    if compiled_available():
        from liebdarboux import _ckernels
        backends["compiled"] = _ckernels
    else:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)

    rows = []
    for name, job in workloads(args.quick).items():
        row = {"kernel": name}
        outs = {}
        for label, mod in backends.items():
            t, outs[label] = best_of(lambda: job(mod), args.repeat)
            row[label] = t
        if len(outs) == 2:
            a, b = outs["python"], outs["compiled"]
            row["max_diff"] = float(np.abs(np.asarray(a) - np.asarray(b)).max())
            row["speedup"] = row["python"] / row["compiled"]
        rows.append(row)

    print(f"{'kernel':<20}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max diff':>12}")
    for r in rows:
        comp = r.get("compiled", float("nan"))
        print(f"{r['kernel']:<20}{r['python']:>12.4g}{comp:>14.4g}"
              f"{r.get('speedup', float('nan')):>10.1f}{r.get('max_diff', float('nan')):>12.2e}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
