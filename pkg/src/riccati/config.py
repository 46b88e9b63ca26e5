"""JSON problem/certificate configuration.

Complex numbers are [re, im] pairs (bare reals accepted on input), and
matrix functions are per-entry lists of basis terms
{"kind", "coeff", "params"}.  Serialization is canonical: sugar forms are
expanded, so parse -> serialize is a fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from numbers import Real

import numpy as np

from .errors import ConfigParseError, DimensionMismatchError
from .integrate import IntegratorOptions
from .problem import Certificate, RiccatiProblem
from .timefn import CONST, COS, EXP, POLY, SIN, BasisTerm, MatrixTimeFn

_PARAM_KEY = {POLY: "k", SIN: "omega", COS: "omega", EXP: "a"}


@dataclass(frozen=True)
class RunConfig:
    problem: RiccatiProblem
    Z0: np.ndarray
    certificate: Certificate | None
    opts: IntegratorOptions
    scan_values: tuple[float, ...] | None = None
    scan_base: np.ndarray | None = None
    scan_direction: np.ndarray | None = None


def _expect_dict(v, field: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigParseError(field, f"expected an object, got {type(v).__name__}")
    return v


def _parse_real(v, field: str) -> float:
    if isinstance(v, bool) or not isinstance(v, Real):
        raise ConfigParseError(field, f"expected a number, got {v!r}")
    return float(v)


def _parse_complex(v, field: str) -> complex:
    if isinstance(v, Real) and not isinstance(v, bool):
        return complex(float(v), 0.0)
    if (isinstance(v, (list, tuple)) and len(v) == 2
            and all(isinstance(x, Real) and not isinstance(x, bool) for x in v)):
        return complex(float(v[0]), float(v[1]))
    raise ConfigParseError(field, f"expected a number or [re, im] pair, got {v!r}")


def _parse_term(v, field: str) -> BasisTerm:
    if isinstance(v, Real) and not isinstance(v, bool):
        return BasisTerm(CONST, complex(float(v), 0.0))
    d = _expect_dict(v, field)
    kind = str(d.get("kind", "")).lower()
    if kind not in (CONST, POLY, SIN, COS, EXP):
        raise ConfigParseError(f"{field}.kind", f"unknown basis kind {d.get('kind')!r}")
    coeff = _parse_complex(d.get("coeff", 1.0), f"{field}.coeff")
    params = d.get("params", {})
    if params is None:
        params = {}
    params = _expect_dict(params, f"{field}.params")
    param = 0.0
    if kind != CONST:
        key = _PARAM_KEY[kind]
        if key not in params:
            raise ConfigParseError(f"{field}.params", f"missing {key!r} for kind {kind!r}")
        param = _parse_real(params[key], f"{field}.params.{key}")
    try:
        return BasisTerm(kind, coeff, param)
    except ValueError as exc:
        raise ConfigParseError(field, str(exc)) from None


def _parse_cell(v, field: str) -> list[BasisTerm]:
    if isinstance(v, Real) and not isinstance(v, bool):
        return [] if v == 0 else [BasisTerm(CONST, complex(float(v), 0.0))]
    if isinstance(v, list):
        # Either a [re, im] pair or a list of terms.
        if (len(v) == 2 and all(isinstance(x, Real) and not isinstance(x, bool)
                                for x in v)):
            c = complex(float(v[0]), float(v[1]))
            return [] if c == 0 else [BasisTerm(CONST, c)]
        return [_parse_term(term, f"{field}[{k}]") for k, term in enumerate(v)]
    if isinstance(v, dict):
        return [_parse_term(v, field)]
    raise ConfigParseError(field, f"expected a term list, got {v!r}")


def _parse_entries(v, field: str, n: int) -> list[list[list[BasisTerm]]]:
    if not isinstance(v, list) or len(v) != n:
        raise DimensionMismatchError(field, f"expected {n} rows")
    rows = []
    for i, row in enumerate(v):
        if not isinstance(row, list) or len(row) != n:
            raise DimensionMismatchError(f"{field}[{i}]", f"expected {n} columns")
        rows.append([_parse_cell(cell, f"{field}[{i}][{j}]")
                     for j, cell in enumerate(row)])
    return rows


def _parse_matrixfn(v, field: str, n_expected: int | None = None) -> MatrixTimeFn:
    if isinstance(v, Real) and not isinstance(v, bool):
        fn = MatrixTimeFn.constant([[complex(float(v), 0.0)]])
    elif isinstance(v, list):
        M = _parse_matrix(v, field, None)
        fn = MatrixTimeFn.constant(M)
    else:
        d = _expect_dict(v, field)
        if "n" not in d:
            raise ConfigParseError(f"{field}.n", "missing dimension")
        n = int(_parse_real(d["n"], f"{field}.n"))
        if n < 1:
            raise ConfigParseError(f"{field}.n", "dimension must be positive")
        if "pieces" in d:
            bps = [_parse_real(b, f"{field}.breakpoints[{i}]")
                   for i, b in enumerate(d.get("breakpoints", []))]
            pieces_raw = d["pieces"]
            if not isinstance(pieces_raw, list) or len(pieces_raw) != len(bps) + 1:
                raise ConfigParseError(
                    f"{field}.pieces",
                    f"need {len(bps) + 1} pieces for {len(bps)} breakpoints")
            piece_entries = []
            for k, piece in enumerate(pieces_raw):
                pd = piece
                if isinstance(piece, dict):
                    pd = piece.get("entries")
                piece_entries.append(
                    _parse_entries(pd, f"{field}.pieces[{k}]", n))
            try:
                fn = MatrixTimeFn.from_pieces(n, piece_entries, bps)
            except ValueError as exc:
                raise ConfigParseError(field, str(exc)) from None
        elif "entries" in d:
            fn = MatrixTimeFn.from_entries(
                n, _parse_entries(d["entries"], f"{field}.entries", n))
        else:
            raise ConfigParseError(field, "need 'entries' or 'pieces'")
    if n_expected is not None and fn.n != n_expected:
        raise DimensionMismatchError(field, f"dimension {fn.n}, expected {n_expected}")
    return fn


def _parse_matrix(v, field: str, n: int | None) -> np.ndarray:
    if isinstance(v, Real) and not isinstance(v, bool):
        v = [[v]]
    if not isinstance(v, list) or not v:
        raise ConfigParseError(field, "expected a matrix (list of rows)")
    rows = len(v)
    M = np.zeros((rows, rows), dtype=np.complex128)
    for i, row in enumerate(v):
        if not isinstance(row, list) or len(row) != rows:
            raise DimensionMismatchError(f"{field}[{i}]",
                                         f"expected {rows} columns for a square matrix")
        for j, cell in enumerate(row):
            M[i, j] = _parse_complex(cell, f"{field}[{i}][{j}]")
    if n is not None and rows != n:
        raise DimensionMismatchError(field, f"dimension {rows}, expected {n}")
    return M


def _parse_problem(d: dict) -> RiccatiProblem:
    d = _expect_dict(d, "problem")
    if "n" not in d:
        raise ConfigParseError("problem.n", "missing dimension")
    n = int(_parse_real(d["n"], "problem.n"))
    t0 = _parse_real(d.get("t0", 0.0), "problem.t0")
    horizon = _parse_real(d.get("horizon", t0 + 10.0), "problem.horizon")
    if horizon <= t0:
        raise ConfigParseError("problem.horizon", "horizon must exceed t0")
    fns = {}
    for name in ("P", "Q", "R", "S"):
        if name not in d:
            raise ConfigParseError(f"problem.{name}", "missing coefficient")
        fns[name] = _parse_matrixfn(d[name], f"problem.{name}", n)
    return RiccatiProblem(n=n, P=fns["P"], Q=fns["Q"], R=fns["R"], S=fns["S"],
                          t0=t0, horizon=horizon)


def _parse_certificate(d: dict, n: int) -> Certificate:
    d = _expect_dict(d, "certificate")
    if "U" not in d:
        raise ConfigParseError("certificate.U", "missing U")
    U = _parse_matrixfn(d["U"], "certificate.U", n)
    Lam = (_parse_matrixfn(d["Lambda"], "certificate.Lambda", n)
           if d.get("Lambda") is not None else MatrixTimeFn.zero(n))
    mu = None
    if d.get("mu") is not None:
        mu = _parse_matrixfn(d["mu"], "certificate.mu", 1)
        if not mu.has_real_coefficients():
            raise ConfigParseError("certificate.mu", "mu must be real-valued")
    gd = _parse_real(d.get("grid_density", 64.0), "certificate.grid_density")
    tol = _parse_real(d.get("tol", 1e-9), "certificate.tol")
    if gd <= 0:
        raise ConfigParseError("certificate.grid_density", "must be positive")
    if tol <= 0:
        raise ConfigParseError("certificate.tol", "must be positive")
    return Certificate(U=U, Lam=Lam, mu=mu, grid_density=gd, tol=tol)


def _parse_options(d: dict | None) -> IntegratorOptions:
    if d is None:
        return IntegratorOptions()
    d = _expect_dict(d, "integrator")
    kwargs = {}
    fields = ("rtol", "atol", "h_min", "h_max", "blowup_threshold", "sample_dt")
    for name in fields:
        if name in d:
            val = _parse_real(d[name], f"integrator.{name}")
            if val <= 0:
                raise ConfigParseError(f"integrator.{name}", "must be positive")
            kwargs[name] = val
    unknown = set(d) - set(fields)
    if unknown:
        raise ConfigParseError(f"integrator.{sorted(unknown)[0]}", "unknown option")
    return IntegratorOptions(**kwargs)


def parse_config_dict(raw: dict) -> RunConfig:
    raw = _expect_dict(raw, "<root>")
    if "problem" not in raw:
        raise ConfigParseError("problem", "missing section")
    prob = _parse_problem(raw["problem"])
    if "initial_value" not in raw:
        raise ConfigParseError("initial_value", "missing initial value")
    Z0 = _parse_matrix(raw["initial_value"], "initial_value", prob.n)
    cert = None
    if raw.get("certificate") is not None:
        cert = _parse_certificate(raw["certificate"], prob.n)
    opts = _parse_options(raw.get("integrator"))
    scan_values = scan_base = scan_dir = None
    if raw.get("scan") is not None:
        sd = _expect_dict(raw["scan"], "scan")
        vals = sd.get("values", [])
        if not isinstance(vals, list):
            raise ConfigParseError("scan.values", "expected a list")
        scan_values = tuple(_parse_real(v, f"scan.values[{i}]")
                            for i, v in enumerate(vals))
        if sd.get("base") is not None:
            scan_base = _parse_matrix(sd["base"], "scan.base", prob.n)
        if sd.get("direction") is not None:
            scan_dir = _parse_matrix(sd["direction"], "scan.direction", prob.n)
    return RunConfig(problem=prob, Z0=Z0, certificate=cert, opts=opts,
                     scan_values=scan_values, scan_base=scan_base,
                     scan_direction=scan_dir)


def parse_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigParseError("<root>", f"invalid JSON: {exc}") from None
    return parse_config_dict(raw)


# -- canonical serialization -------------------------------------------------

def _complex_out(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def _term_out(term: BasisTerm) -> dict:
    params: dict = {}
    if term.kind == POLY:
        params = {"k": int(term.param)}
    elif term.kind in (SIN, COS):
        params = {"omega": float(term.param)}
    elif term.kind == EXP:
        params = {"a": float(term.param)}
    return {"kind": term.kind, "coeff": _complex_out(term.coeff), "params": params}


def _matrixfn_out(fn: MatrixTimeFn) -> dict:
    pieces = [{"entries": [[[_term_out(t) for t in cell] for cell in row]
                           for row in piece]}
              for piece in fn.pieces_entry_terms()]
    return {"n": fn.n, "breakpoints": list(fn.breakpoints), "pieces": pieces}


def _matrix_out(M: np.ndarray) -> list:
    return [[_complex_out(complex(M[i, j])) for j in range(M.shape[1])]
            for i in range(M.shape[0])]


def serialize_config(cfg: RunConfig) -> dict:
    prob = cfg.problem
    out: dict = {
        "problem": {
            "n": prob.n, "t0": prob.t0, "horizon": prob.horizon,
            "P": _matrixfn_out(prob.P), "Q": _matrixfn_out(prob.Q),
            "R": _matrixfn_out(prob.R), "S": _matrixfn_out(prob.S),
        },
        "initial_value": _matrix_out(cfg.Z0),
        "integrator": {
            "rtol": cfg.opts.rtol, "atol": cfg.opts.atol,
            "h_min": cfg.opts.h_min, "h_max": cfg.opts.h_max,
            "blowup_threshold": cfg.opts.blowup_threshold,
            "sample_dt": cfg.opts.sample_dt,
        },
    }
    if cfg.certificate is not None:
        cert = cfg.certificate
        out["certificate"] = {
            "U": _matrixfn_out(cert.U),
            "Lambda": _matrixfn_out(cert.Lam),
            "mu": _matrixfn_out(cert.mu) if cert.mu is not None else None,
            "grid_density": cert.grid_density,
            "tol": cert.tol,
        }
    if cfg.scan_values is not None:
        out["scan"] = {
            "values": list(cfg.scan_values),
            "base": _matrix_out(cfg.scan_base) if cfg.scan_base is not None else None,
            "direction": (_matrix_out(cfg.scan_direction)
                          if cfg.scan_direction is not None else None),
        }
    return out


def config_to_json(cfg: RunConfig) -> str:
    return json.dumps(serialize_config(cfg), indent=2, sort_keys=True) + "\n"
