"""Command-line interface.

Subcommands::

    bands     Lieb-lattice band surface on an nk x nk grid
              csv columns: kx, ky, E0, E+, E-
    case      sampled potential, named profiles and missing states of a case
              csv columns: x, Re/Im of V[i][j], named profiles,
              Re/Im of psi<j>_<c>; hermiticity report in <out>.hermiticity.json
    verify    hermiticity, intertwining, eigen-residual, regularity, closed-form
              and symmetry checks; csv columns: check, value, threshold, pass
    scatter   reflection/transmission; csv columns: E, R, T, error
    spectrum  bound energies vs the expected discrete spectrum;
              csv columns: kind, energy, residual, matched

Exit codes: 0 success, 1 verification failure, 2 bad configuration,
3 singular seed or other runtime singularity.

Every JSON document carries ``"schema": 1``.  Floats are written with 17
significant digits in CSV and as shortest round-trip reprs in JSON, so equal
configurations give byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .algebra import S
from .cases import (DEFAULT_EPS, CaseModel, case_model, expected_spectrum, named_profiles,
                    oracle_crosscheck)
from .darboux import hermiticity_report, intertwining_residual, regularity_scan
from .errors import (AlgebraicDegeneracy, DarbouxError, EvanescentEnergy, InvalidParameters,
                     NoAsymptote, NonAsymptoticPotential, SingularSeed, Unsupported)
from .free_model import probe_solutions
from .lattice import TBParams, band_scan
from .scattering import scatter_scan
from .spectral import Grid, case_spectrum, eigen_residual

__all__ = ["RunConfig", "ConfigError", "build_parser", "load_config", "main", "COMMANDS"]

COMMANDS = ("bands", "case", "verify", "scatter", "spectrum")
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
SCHEMA = 1

HERMITICITY_TOL = 1e-12
INTERTWINING_TOL = 1e-9
EIGEN_TOL = 1e-10
ORACLE_TOL = 1e-10
SYMMETRY_TOL = 1e-12


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    case: str = "I"
    m: float = 1.0
    eps: Optional[float] = None
    hv: float = 1.0
    ell: float = 1.0
    mirror: bool = False
    nonflat_seed: bool = False
    domain: tuple = (-10.0, 10.0)
    n: int = 2001
    nk: int = 100
    energies: list = field(default_factory=lambda: [1.1, 1.5, 2.0, 3.0, 5.0])
    tau1: float = 1.0
    tau2: float = 1.0
    tau3: float = 1.0
    tau4: float = 1.0
    t3: float = 0.0
    muA: float = 0.0
    muB: float = 0.0
    muC: float = 0.0
    a: float = 1.0
    out: Optional[str] = None
    format: str = "csv"

    def resolved_eps(self) -> float:
        if self.eps is not None:
            return self.eps
        eps = DEFAULT_EPS[self.case]
        return -eps if (self.case == "II" and self.mirror) else eps

    def case_params(self) -> CaseModel:
        try:
            return CaseModel(self.case, m=self.m, eps=self.resolved_eps(), hv=self.hv,
                             ell=self.ell, mirror=self.mirror, nonflat=self.nonflat_seed
                             ).validate()
        except (DarbouxError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def tb_params(self) -> TBParams:
        try:
            return TBParams(self.tau1, self.tau2, self.tau3, self.tau4, self.t3,
                            self.muA, self.muB, self.muC, self.a)
        except DarbouxError as exc:
            raise ConfigError(str(exc)) from exc

    def check(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.case not in ("I", "II", "III", "IV"):
            raise ConfigError("case must be one of I, II, III, IV")
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ConfigError("domain must satisfy A < B")
        if self.n < 3:
            raise ConfigError("n must be at least 3")
        if self.nk < 2:
            raise ConfigError("nk must be at least 2")
        if any(not math.isfinite(e) for e in self.energies):
            raise ConfigError("energies must be finite")
        if self.command == "bands":
            self.tb_params()
        else:
            self.case_params()
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    try:
        if key == "domain":
            lo, hi = value
            return (float(lo), float(hi))
        if key == "energies":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if key in ("n", "nk"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in ("mirror", "nonflat_seed"):
            if not isinstance(value, bool):
                raise ValueError
            return value
        if key in ("case", "format", "command"):
            return str(value)
        if key == "out":
            return None if value is None else str(value)
        if key == "eps" and value is None:
            return None
        if isinstance(value, bool):
            raise ValueError
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    doc = {k.replace("-", "_"): v for k, v in doc.items()}
    unknown = sorted(set(doc) - set(_FIELD_TYPES) - {"schema"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    doc.pop("schema", None)
    return doc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="liebdarboux", description=__doc__.split("\n\n")[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     epilog=__doc__.split("\n\n", 1)[1])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with any of the options below")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--case", choices=("I", "II", "III", "IV"))
        for opt in ("m", "eps", "hv", "ell"):
            p.add_argument(f"--{opt}", type=float)
        p.add_argument("--mirror", action="store_true", default=None,
                       help="case II with eps > 0 via the chiral mirror")
        p.add_argument("--nonflat-seed", dest="nonflat_seed", action="store_true", default=None,
                       help="case I with a gap state instead of the flat-band seed")
        p.add_argument("--domain", nargs=2, type=float, metavar=("A", "B"))
        p.add_argument("--n", type=int)
        p.add_argument("--nk", type=int)
        p.add_argument("--energies", metavar="E1,E2,...")
        for opt in ("tau1", "tau2", "tau3", "tau4", "t3", "muA", "muB", "muC", "a"):
            p.add_argument(f"--{opt}", type=float)
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    merged = {}
    if args.config:
        merged.update(load_config(args.config))
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        merged[key] = val
    merged.pop("command", None)
    cfg = RunConfig(command=args.command)
    for key, val in merged.items():
        setattr(cfg, key, _coerce(key, val))
    return cfg.check()


# output helpers

def _f(x: float) -> str:
    return "{:.16e}".format(float(x))


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _f(c) for c in row))
    return "\n".join(lines) + "\n"


def _json(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n"


def atomic_write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sidecar(path: str, suffix: str) -> str:
    stem, _ = os.path.splitext(path)
    return stem + suffix


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _case_doc(p: CaseModel) -> dict:
    return {"case": p.tag, "m": p.m, "eps": p.eps, "hv": p.hv, "ell": p.ell,
            "mirror": p.mirror, "nonflat_seed": p.nonflat}


# commands

def cmd_bands(cfg: RunConfig) -> int:
    p = cfg.tb_params()
    surf = band_scan(p, cfg.nk)
    lo, hi = surf.middle_band_range()
    flat = max(abs(lo), abs(hi)) <= 1e-12
    _note(f"middle band range [{lo:.3e}, {hi:.3e}]: "
          + ("flat band at E=0" if flat else "no flat band"))
    atomic_write(cfg.out, surf.to_json() if cfg.format == "json" else surf.to_csv())
    return EXIT_OK


def _require_regular(tm, cfg: RunConfig):
    rep = regularity_scan(tm.seed, cfg.domain, max(cfg.n, 2001))
    if not rep.passed:
        raise SingularSeed(rep.argmin_ratio, rep.min_abs_det, rep.min_ratio)
    return rep


def cmd_case(cfg: RunConfig) -> int:
    p = cfg.case_params()
    tm = case_model(p)
    _require_regular(tm, cfg)
    xs = Grid(cfg.domain[0], cfg.domain[1], cfg.n).points()
    v = np.asarray(tm.model.potential(xs), dtype=np.complex128)
    prof = {k: np.broadcast_to(np.asarray(val, dtype=float), xs.shape)
            for k, val in named_profiles(p, xs).items()}
    psis = [np.asarray(ps.value(xs), dtype=np.complex128) for ps in tm.missing_states]
    herm = hermiticity_report(tm.seed, tm.base, cfg.domain, cfg.n, HERMITICITY_TOL)
    herm_doc = {"schema": SCHEMA, "kind": "hermiticity", "params": _case_doc(p),
                "max_defect": herm.max_defect, "location": herm.location,
                "index": list(herm.index), "tol": herm.tol, "pass": bool(herm.passed)}

    if cfg.format == "json":
        doc = {
            "schema": SCHEMA, "kind": "case", "params": _case_doc(p),
            "x": [float(t) for t in xs],
            "potential": {f"V{i}{j}": {"re": v[:, i, j].real.tolist(),
                                       "im": v[:, i, j].imag.tolist()}
                          for i in range(3) for j in range(3)},
            "profiles": {k: val.tolist() for k, val in prof.items()},
            "missing_states": [
                {"energy": float(tm.seed.energies[j]),
                 "components": [{"re": psis[j][:, c].real.tolist(),
                                 "im": psis[j][:, c].imag.tolist()} for c in range(3)]}
                for j in range(3)],
            "hermiticity": herm_doc,
        }
        atomic_write(cfg.out, _json(doc))
    else:
        header = ["x"]
        cols = [xs]
        for i in range(3):
            for j in range(3):
                header += [f"reV{i}{j}", f"imV{i}{j}"]
                cols += [v[:, i, j].real, v[:, i, j].imag]
        for k, val in prof.items():
            header.append(k)
            cols.append(val)
        for j in range(3):
            for c in range(3):
                header += [f"rePsi{j}_{c}", f"imPsi{j}_{c}"]
                cols += [psis[j][:, c].real, psis[j][:, c].imag]
        table = np.column_stack(cols)
        atomic_write(cfg.out, _csv(header, table))
        if cfg.out is not None:
            atomic_write(_sidecar(cfg.out, ".hermiticity.json"), _json(herm_doc))
    _note(f"hermiticity defect {herm.max_defect:.3e} at x={herm.location:+.4f}: "
          + ("pass" if herm.passed else "FAIL"))
    return EXIT_OK


def verify_checks(p: CaseModel, domain, n: int) -> list[dict]:
    """Each check as ``{check, value, threshold, pass}``."""
    tm = case_model(p)
    checks = []

    def add(name, value, threshold):
        checks.append({"check": name, "value": float(value), "threshold": float(threshold),
                       "pass": bool(value < threshold) if name != "regularity"
                       else bool(value > threshold)})

    reg = regularity_scan(tm.seed, domain, max(n, 2001))
    add("regularity", reg.min_ratio, reg.threshold)
    if not reg.passed:
        raise SingularSeed(reg.argmin_ratio, reg.min_abs_det, reg.min_ratio)
    herm = hermiticity_report(tm.seed, tm.base, domain, n, HERMITICITY_TOL)
    add("hermiticity", herm.max_defect, HERMITICITY_TOL)
    inter = max(intertwining_residual(tm.base, tm.seed, ps, domain, n, relative=True)
                for ps in probe_solutions(p.m, p.hv))
    add("intertwining", inter, INTERTWINING_TOL)
    grid = Grid(domain[0], domain[1], n)
    eig = max(eigen_residual(tm.model, ps, lam, grid)
              for ps, lam in zip(tm.missing_states, tm.seed.energies))
    add("eigen_residual", eig, EIGEN_TOL)
    if not p.nonflat:
        lo, hi = max(domain[0], -8.0), min(domain[1], 8.0)
        add("closed_form", oracle_crosscheck(p, (lo, hi) if hi > lo else domain), ORACLE_TOL)
    xs = grid.points()
    v = np.asarray(tm.model.potential(xs), dtype=np.complex128)
    if p.tag == "I":
        add("chiral", float(np.abs(S @ v + v @ S).max()), SYMMETRY_TOL)
    if p.tag == "IV":
        block = max(float(np.abs(v[:, 2, :]).max()), float(np.abs(v[:, :, 2]).max()))
        add("block", block, SYMMETRY_TOL)
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.case_params()
    checks = verify_checks(p, cfg.domain, cfg.n)
    ok = all(c["pass"] for c in checks)
    if cfg.format == "json":
        text = _json({"schema": SCHEMA, "kind": "verify", "params": _case_doc(p),
                      "checks": checks, "pass": ok})
    else:
        text = _csv(["check", "value", "threshold", "pass"],
                    [(c["check"], c["value"], c["threshold"], str(c["pass"]).lower())
                     for c in checks])
    atomic_write(cfg.out, text)
    for c in checks:
        if not c["pass"]:
            _note(f"FAIL {c['check']}: {c['value']:.3e} (threshold {c['threshold']:.1e})")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_scatter(cfg: RunConfig) -> int:
    p = cfg.case_params()
    tm = case_model(p)
    results = scatter_scan(tm, cfg.energies)
    if cfg.format == "json":
        text = _json({"schema": SCHEMA, "kind": "scatter", "params": _case_doc(p),
                      "results": [{"E": r.energy, "R": r.reflection, "T": r.transmission,
                                   "error": r.error} for r in results]})
    else:
        text = _csv(["E", "R", "T", "error"],
                    [(r.energy, r.reflection, r.transmission, (r.error or "").replace(",", ";"))
                     for r in results])
    atomic_write(cfg.out, text)
    bad = [r for r in results if r.error]
    for r in bad:
        _note(f"E={r.energy!r}: {r.error}")
    return EXIT_CONFIG if bad else EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    p = cfg.case_params()
    tm = case_model(p)
    rep = case_spectrum(tm)
    expected = expected_spectrum(p)
    ok = rep.matches(1e-8)
    rows = []
    for e, r in zip(rep.found_energies, rep.residuals):
        hit = any(abs(e - x) <= 1e-8 for x in expected)
        rows.append(("found", e, r, str(hit).lower()))
    for x in expected:
        hit = any(abs(e - x) <= 1e-8 for e in rep.found_energies)
        rows.append(("expected", x, float("nan"), str(hit).lower()))
    if cfg.format == "json":
        text = _json({"schema": SCHEMA, "kind": "spectrum", "params": _case_doc(p),
                      "found": rep.found_energies, "residuals": rep.residuals,
                      "shot": rep.shot, "confirmed": rep.confirmed,
                      "expected": expected, "pass": ok})
    else:
        text = _csv(["kind", "energy", "residual", "matched"], rows)
    atomic_write(cfg.out, text)
    if not ok:
        _note(f"spectrum mismatch: found {rep.found_energies}, expected {expected}")
    return EXIT_OK if ok else EXIT_VERIFY


_DISPATCH = {"bands": cmd_bands, "case": cmd_case, "verify": cmd_verify,
             "scatter": cmd_scatter, "spectrum": cmd_spectrum}


def run(cfg: RunConfig) -> int:
    try:
        return _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        _note(f"config error: {exc}")
        return EXIT_CONFIG
    except (SingularSeed, AlgebraicDegeneracy, NoAsymptote, NonAsymptoticPotential) as exc:
        _note(f"runtime failure: {exc}")
        return EXIT_RUNTIME
    except (InvalidParameters, EvanescentEnergy, Unsupported) as exc:
        _note(f"config error: {exc}")
        return EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        _note(f"config error: {exc}")
        return EXIT_CONFIG
    return run(cfg)
