"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 regime error,
3 non-convergence (or a verification target not met).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import asymptotics, coeffs, measures, oracles
from .limits import NonConvergenceWarning, XInBandError

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_NONCONV = 0, 1, 2, 3

_REGIME_ERRORS = (
    measures.RegimeMismatchError,
    measures.RootError,
    XInBandError,
    asymptotics.XOutsideBandError,
    asymptotics.XTooCloseError,
)


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# parsing helpers


def parse_params(text: str | None) -> dict:
    """``k=v,k=v`` with numeric values (Greek or ASCII keys)."""
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"malformed parameter {item!r}; expected key=value")
        k, v = (s.strip() for s in item.split("=", 1))
        if not k:
            raise UsageError(f"malformed parameter {item!r}; empty key")
        try:
            out[k] = float(v)
        except ValueError:
            raise UsageError(f"parameter {k!r} has non-numeric value {v!r}") from None
    return out


def parse_grid(text: str) -> np.ndarray:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must be lo:hi:step")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid {text!r} must be numeric lo:hi:step") from None
    if not (step > 0 and hi >= lo):
        raise UsageError(f"grid {text!r} needs step > 0 and hi >= lo")
    m = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(m), 12)


def parse_interval(text: str) -> tuple[float, float]:
    parts = str(text).split(":")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"interval {text!r} must be lo:hi") from None
    if not hi > lo:
        raise UsageError(f"interval {text!r} needs lo < hi")
    return lo, hi


def parse_ns(text: str) -> list[int]:
    """``lo:hi`` doubling from lo to hi, or a comma list."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            out, n = [], lo
            while n <= hi:
                out.append(n)
                n *= 2
            return out
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"index list {text!r} must be lo:hi or n1,n2,...") from None


def _sequence(cfg: dict) -> coeffs.CoefficientSequence:
    if cfg.get("sequence") is not None:
        return coeffs.from_json(cfg["sequence"])
    if not cfg.get("preset"):
        raise UsageError("a sequence is required: --preset NAME or a 'sequence' entry in --json-config")
    return coeffs.preset(cfg["preset"], cfg.get("params") or {})


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    return repr(float(v))


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands; each returns (text, exit_code)


def cmd_hypotheses(cfg: dict):
    seq = _sequence(cfg)
    rep = coeffs.check_hypotheses(seq, N=int(cfg.get("N") or 10_000))
    code = EXIT_OK if rep.regime in (coeffs.Regime.AC, coeffs.Regime.DISCRETE) else EXIT_REGIME
    return _json(rep.to_dict()), code


def cmd_density(cfg: dict):
    seq = _sequence(cfg)
    grid = parse_grid(cfg.get("grid") or "-4:4:0.05")
    tol = float(cfg.get("tol") or 1e-6)
    n_max = int(cfg.get("nmax") or 2**20)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        vals = measures.ac_density_batch(seq, grid, tol=tol, n_max=n_max, threads=cfg.get("threads"))
    text = _csv(["x", "density"], [(v.x, v.density) for v in vals])
    bad = [v.x for v in vals if not v.converged]
    if bad:
        _diag("NON_CONVERGED", f"{len(bad)} grid point(s) did not reach tol={tol} within n_max={n_max}")
        return text, EXIT_NONCONV
    return text, EXIT_OK


def _default_interval(seq, count: int) -> tuple[float, float]:
    a, b = seq.arrays(2001)
    count = max(1, min(count, 1998))
    eig, _ = oracles.tridiag_eigs(b[:2000], a[1:2000], weights=False, select="i", select_range=(0, count))
    gap = eig[count] - eig[count - 1]
    return float(eig[0] - max(1.0, gap)), float(0.5 * (eig[count - 1] + eig[count]))


def cmd_spectrum(cfg: dict):
    seq = _sequence(cfg)
    if cfg.get("interval"):
        lo, hi = parse_interval(cfg["interval"])
    else:
        lo, hi = _default_interval(seq, int(cfg.get("count") or 10))
    tol = float(cfg.get("tol") or 1e-12)
    n_max = int(cfg.get("nmax") or 2**20)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        pts = measures.discrete_spectrum(seq, lo, hi, tol=tol, n_max=n_max)
    text = _csv(["x", "mass"], pts)
    if any("not stable" in str(w.message) for w in caught):
        _diag("NON_CONVERGED", f"point spectrum not stable within n_max={n_max}")
        return text, EXIT_NONCONV
    return text, EXIT_OK


def cmd_frozen(cfg: dict):
    seq = _sequence(cfg)
    n0 = cfg.get("n0")
    if n0 is None:
        raise UsageError("frozen needs --n0")
    grid = parse_grid(cfg["grid"]) if cfg.get("grid") else None
    m = measures.frozen_measure(seq, int(n0), grid=grid)
    return _json(m.to_dict()), EXIT_OK


def cmd_asymptotics(cfg: dict):
    seq = _sequence(cfg)
    try:
        x = complex(str(cfg.get("x", "0")).replace(" ", ""))
    except ValueError:
        raise UsageError(f"x {cfg.get('x')!r} is not a number") from None
    ns = parse_ns(str(cfg.get("ns") or "128:8192"))
    mode = cfg.get("mode") or ("band" if x.imag == 0 and abs(measures._d(seq)) < 1 else "offband")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if mode == "band":
            if x.imag != 0:
                raise UsageError("band asymptotics need real x")
            reps = asymptotics.band_asymptotic_series(seq, x.real, ns)
        elif mode == "offband":
            reps = asymptotics.offband_asymptotic_series(seq, x, ns)
        else:
            raise UsageError(f"unknown mode {mode!r}")
    return asymptotics.to_jsonl(reps), EXIT_OK


def cmd_verify(cfg: dict):
    seq = _sequence(cfg)
    deg = int(cfg.get("nmax") or 8)
    threshold = float(cfg.get("threshold") or 1e-2)
    regime = coeffs.check_hypotheses(seq).regime
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if regime == coeffs.Regime.AC:
            grid = parse_grid(cfg.get("grid") or "-8:8:0.02")
            m = measures.ac_measure(seq, grid, tol=float(cfg.get("tol") or 1e-6), threads=cfg.get("threads"))
        elif regime == coeffs.Regime.DISCRETE:
            lo, hi = (parse_interval(cfg["interval"]) if cfg.get("interval")
                      else _default_interval(seq, int(cfg.get("count") or 20)))
            m = measures.discrete_measure(seq, lo, hi)
        else:
            _diag("REGIME", f"cannot verify a sequence with regime {regime}")
            return _json({"regime": regime, "status": "FAIL"}), EXIT_REGIME
    orth = oracles.orthonormality_check(m, deg)
    mass = m.total_mass()
    mom_dev = 0.0
    for k in range(2 * deg + 1):
        exact = measures.moments_jacobi(seq, k)
        got = m.integrate(lambda x, k=k: np.asarray(x, dtype=float) ** k)
        mom_dev = max(mom_dev, abs(got - exact) / max(abs(exact), 1.0))
    checks = {
        "orthonormality": {"max_error": orth, "pass": orth < threshold},
        "total_mass": {"value": mass, "pass": abs(mass - 1.0) < 1e-3},
        "moments": {"k_max": 2 * deg, "max_deviation": mom_dev, "pass": mom_dev < threshold},
    }
    ok = all(c["pass"] for c in checks.values())
    doc = {"regime": regime, "degree": deg, "checks": checks, "status": "PASS" if ok else "FAIL",
           "provenance": m.provenance}
    return _json(doc), EXIT_OK if ok else EXIT_NONCONV


COMMANDS = {
    "hypotheses": cmd_hypotheses,
    "density": cmd_density,
    "spectrum": cmd_spectrum,
    "frozen": cmd_frozen,
    "asymptotics": cmd_asymptotics,
    "verify": cmd_verify,
}


def _diag(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jacobi-spectra", description="Spectral measures of Jacobi matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--preset")
        s.add_argument("--params")
        s.add_argument("--json-config", dest="json_config")
        s.add_argument("--out")
        s.add_argument("--threads", type=int)
        if name == "hypotheses":
            s.add_argument("--N", type=int)
        if name in ("density", "verify", "frozen"):
            s.add_argument("--grid")
        if name in ("density", "spectrum", "verify"):
            s.add_argument("--tol", type=float)
        if name in ("density", "spectrum", "verify"):
            s.add_argument("--nmax", type=int)
        if name in ("spectrum", "verify"):
            s.add_argument("--interval")
            s.add_argument("--count", type=int)
        if name == "frozen":
            s.add_argument("--n0", type=int)
        if name == "asymptotics":
            s.add_argument("--x")
            s.add_argument("--ns")
            s.add_argument("--mode", choices=["band", "offband"])
        if name == "verify":
            s.add_argument("--threshold", type=float)
    return p


def _config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.json_config:
        try:
            cfg.update(json.loads(Path(args.json_config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.json_config}: {exc}") from None
    for k, v in vars(args).items():
        if k in ("command", "json_config") or v is None:
            continue
        cfg[k] = parse_params(v) if k == "params" else v
    if cfg.get("threads") == 0:
        cfg["threads"] = 0
    return cfg


_VALUE_FLAGS = ("--grid", "--interval", "--x", "--ns", "--params")


def _glue_values(argv: list[str]) -> list[str]:
    # "--grid -4:4:0.05" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        cfg = _config(args)
        text, code = COMMANDS[args.command](cfg)
    except UsageError as exc:
        _diag("USAGE", str(exc))
        return EXIT_USAGE
    except _REGIME_ERRORS as exc:
        _diag(getattr(exc, "code", "REGIME"), str(exc))
        return EXIT_REGIME
    except ValueError as exc:
        # bad preset names, non-positive coefficients and similar
        _diag("CONFIG", str(exc))
        return EXIT_USAGE
    _emit(text, cfg.get("out"))
    return code


if __name__ == "__main__":
    sys.exit(main())
