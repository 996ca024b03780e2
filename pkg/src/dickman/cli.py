"""Command-line interface.

Exit codes: 0 on success, 1 on a domain error, 2 when a verification check
fails, 64 on malformed arguments. Output carries no timestamps or host
names, so identical arguments give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import DomainError, VerificationError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_VERIFY = 2
EXIT_USAGE = 64


def fmt(x: Any) -> str:
    """Shortest decimal that reads back to the same double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class RunConfig:
    """Resolved run: subcommand, parameters, output target and format."""

    command: str
    params: dict
    out: Optional[str] = None
    format: Optional[str] = None
    seed: Optional[int] = None
    threads: int = 1

    def echo(self) -> list[str]:
        lines = [f"command={self.command}"]
        for key in sorted(self.params):
            value = self.params[key]
            if isinstance(value, (list, tuple)):
                value = ",".join(fmt(v) for v in value)
            else:
                value = fmt(value)
            lines.append(f"{key}={value}")
        lines.append(f"threads={self.threads}")
        return lines


@dataclass
class Result:
    """Scalar, table or record output with a verdict."""

    kind: str
    value: Any = None
    columns: Sequence[str] = ()
    rows: list = field(default_factory=list)
    record: dict = field(default_factory=dict)
    ok: bool = True
    message: str = ""


# ---------------------------------------------------------------------------
# emitters


def _emit_csv(cfg: RunConfig, columns: Sequence[str], rows: list, stream) -> None:
    stream.write(f"# dickman {__version__}\n")
    for line in cfg.echo():
        stream.write(f"# {line}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _emit_json(cfg: RunConfig, payload: dict, stream) -> None:
    doc = {"version": __version__, "config": dict(command=cfg.command, threads=cfg.threads, **cfg.params)}
    doc.update(payload)
    stream.write(json.dumps(_jsonable(doc), sort_keys=True, allow_nan=True) + "\n")


def emit(cfg: RunConfig, result: Result, stream) -> None:
    kind = result.kind
    form = cfg.format
    if kind == "scalar" and form is None:
        stream.write(fmt(result.value) + "\n")
    elif kind == "scalar":
        if form == "json":
            _emit_json(cfg, {"value": result.value}, stream)
        else:
            _emit_csv(cfg, ["value"], [[result.value]], stream)
    elif kind == "table":
        if form == "json":
            rows = [dict(zip(result.columns, row)) for row in result.rows]
            _emit_json(cfg, {"rows": rows, "passed": result.ok}, stream)
        else:
            _emit_csv(cfg, result.columns, result.rows, stream)
    else:
        if form == "csv":
            _emit_csv(cfg, ["key", "value"], sorted(result.record.items()), stream)
        else:
            _emit_json(cfg, result.record, stream)


# ---------------------------------------------------------------------------
# handlers


def _density(p):
    from .dickman_core import build_density_grid, density_f

    if p["grid"]:
        grid = build_density_grid(p["s"], h=p["h"], t_max=p["t_max"])
        return Result("table", columns=("t", "f_s"), rows=list(zip(grid.t.tolist(), grid.values.tolist())))
    if p["t"] is None:
        raise DomainError("--t is required unless --grid is given")
    return Result("scalar", density_f(p["s"], p["t"], h=p["h"], t_max=max(p["t_max"], math.ceil(p["t"]))))


def _rho(p):
    from .dickman_core import dickman_rho

    return Result("scalar", dickman_rho(p["t"], h=p["h"]))


def _cdf(p):
    from .dickman_core import cdf_F

    return Result("scalar", cdf_F(p["s"], p["t"], h=p["h"], t_max=max(p["t_max"], math.ceil(p["t"]))))


def _green(p):
    from .green import green_extend

    if p["table"] is not None:
        lo, hi, step = p["table"]
        if not (step > 0.0 and 0.0 < lo <= hi):
            raise DomainError("--table needs 0 < tmin <= tmax and step > 0")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        ts = [lo + i * step for i in range(count)]
        return Result("table", columns=("t", "G"), rows=[(t, green_extend(p["theta"], t)) for t in ts])
    if p["t"] is None:
        raise DomainError("--t is required unless --table is given")
    return Result("scalar", green_extend(p["theta"], p["t"]))


def _green_bar(p):
    from .green import green_bar

    return Result("scalar", green_bar(p["theta"], p["t"]))


def _lam(p, N: int) -> float:
    from .renewal import lambda_for_theta

    if p.get("lam") is not None:
        return p["lam"]
    return lambda_for_theta(N, p["theta"])


def _base_law(name: str, N: int):
    from .models import pinning_weights
    from .renewal import law_from_harmonic

    return law_from_harmonic(N) if name == "harmonic" else pinning_weights(N)


def _renewal_u(p):
    from .renewal import renewal_density

    N = p["N"]
    n_max = N if p["n_max"] is None else p["n_max"]
    dens = renewal_density(_base_law(p["law"], N), _lam(p, N), n_max)
    return Result("table", columns=("n", "U"), rows=[(n, dens.U[n]) for n in range(n_max + 1)])


def _spacetime_law(name: str, N: int, c: float):
    from .models import polymer_spacetime_law
    from .renewal import discrete_gaussian_law, law_from_harmonic

    if name == "polymer":
        return polymer_spacetime_law(N)
    return discrete_gaussian_law(law_from_harmonic(N), c)


def _spacetime_u(p):
    from .renewal import spacetime_point_density

    N = p["N"]
    law = _spacetime_law(p["law"], N, p["c"])
    return Result("scalar", spacetime_point_density(law, _lam(p, N), p["n"], (p["x1"], p["x2"])))


def _verify_renewal(p):
    from .renewal import verify_renewal_theorem

    rep = verify_renewal_theorem(p["Ns"], p["theta"], p["t"])
    rows = [(N, r, e) for N, r, e in zip(rep.Ns, rep.ratios, rep.errors)]
    ok = rep.passes(p["tol"])
    return Result("table", columns=("N", "ratio", "error"), rows=rows, ok=ok,
                  message="" if ok else "renewal check failed: errors not shrinking or above tolerance")


def _verify_spacetime(p):
    from .renewal import verify_spacetime_theorem

    rep = verify_spacetime_theorem(p["Ns"], p["theta"], p["t"], (p["x1"], p["x2"]))
    rows = [(N, r, e) for N, r, e in zip(rep.Ns, rep.ratios, rep.errors)]
    ok = rep.passes(p["tol"])
    return Result("table", columns=("N", "ratio", "error"), rows=rows, ok=ok,
                  message="" if ok else "space-time check failed: errors not shrinking or above tolerance")


def _bounds(p):
    from .renewal import FROZEN, sweep_fuk_nagaev, sweep_lower_tail, sweep_sharp_local

    top = p["max"]
    rng = range(1, top + 1)
    rows = []
    which = p["which"]
    if which in ("sharp-local", "all"):
        best = sweep_sharp_local(Ns=tuple(rng), k_max=top, n_max=top, c=FROZEN["sharp_local_c"])
        rows.append(("sharp_local_C", best, FROZEN["sharp_local_C"], best <= FROZEN["sharp_local_C"]))
    if which in ("fuk-nagaev", "all"):
        best = sweep_fuk_nagaev(ms=rng, k_max=top, n_max=top)
        rows.append(("fuk_nagaev_C", best, FROZEN["fuk_nagaev_C"], best <= FROZEN["fuk_nagaev_C"]))
    if which in ("lower-tail", "all"):
        best = sweep_lower_tail(ms=rng, k_max=top, n_max=top)
        rows.append(("lower_tail_c", best, FROZEN["lower_tail_c"], best >= FROZEN["lower_tail_c"]))
    ok = all(r[3] for r in rows)
    return Result("table", columns=("constant", "best", "frozen", "holds"), rows=rows, ok=ok,
                  message="" if ok else "a frozen constant fails on the sweep")


def _sim_config(p):
    from .montecarlo import SimulationConfig

    return SimulationConfig(seed=p["seed"], samples=p["samples"], epsilon=p["epsilon"], s=p["s"])


def _simulate(p, threads):
    from .montecarlo import sample_dickman

    draws = sample_dickman(_sim_config(p), threads=threads)
    rows = [(i, y, m) for i, (y, m) in enumerate(draws)]
    return Result("table", columns=("sample", "Y", "M"), rows=rows)


def _test_scale(p, threads):
    from .montecarlo import test_scale_invariance

    res = test_scale_invariance(_sim_config(p), p["t"], threads=threads)
    record = {"statistic": res.statistic, "critical": res.critical, "accepted": res.accepted,
              "reference": res.reference, "passed": res.passed}
    return Result("record", record=record, ok=res.passed,
                  message="" if res.passed else "KS distance above the 1% critical value")


def _moment_record(value, N, theta, dname):
    from .models import beta_for_theta, critical_sigma2, disorder, pinning_weights

    d = disorder(dname)
    sigma2 = critical_sigma2(N, theta)
    beta = beta_for_theta(d, N, theta)
    return {"value": value, "lambda": sigma2 * pinning_weights(N).R_N, "sigma2": sigma2, "beta": beta}


def _pinning_m2(p):
    from .models import beta_for_theta, disorder, pinning_second_moment

    d = disorder(p["disorder"])
    value = pinning_second_moment(p["n"], p["N"], beta_for_theta(d, p["N"], p["theta"]), d)
    return Result("record", record=_moment_record(value, p["N"], p["theta"], p["disorder"]))


def _polymer_m2(p):
    from .models import beta_for_theta, disorder, polymer_second_moment

    d = disorder(p["disorder"])
    value = polymer_second_moment(p["n"], (p["x1"], p["x2"]), p["N"], beta_for_theta(d, p["N"], p["theta"]), d)
    return Result("record", record=_moment_record(value, p["N"], p["theta"], p["disorder"]))


def _alpha(p):
    from .models import ALPHA, alpha_check

    rec = alpha_check(p["N"])
    rec["alpha"] = ALPHA
    return Result("record", record=rec)


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(sp):
    sp.add_argument("--out", help="'csv' or 'json' to pick the format, otherwise a file path")
    sp.add_argument("--format", choices=("csv", "json"), default=None)
    sp.add_argument("--threads", type=int, default=None, help="worker threads (default DICKMAN_THREADS or 1)")


def _sim_args(sp, t_required: bool = False):
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epsilon", type=float, default=1e-4)
    if t_required:
        sp.add_argument("--t", type=float, required=True)


HANDLERS: dict[str, Callable] = {}


def build_parser() -> argparse.ArgumentParser:
    from .dickman_core import DEFAULT_H, DEFAULT_T_MAX

    parser = _Parser(prog="dickman", description="Dickman subordinator and renewal-array numerics")
    parser.add_argument("--version", action="version", version=f"dickman {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text)
        _common(sp)
        HANDLERS[name] = handler
        return sp

    sp = add("density", _density, "density f_s(t)")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--grid", action="store_true", help="dump the whole grid as CSV")
    sp.add_argument("--h", type=float, default=DEFAULT_H)
    sp.add_argument("--t-max", dest="t_max", type=float, default=DEFAULT_T_MAX)

    sp = add("rho", _rho, "Dickman function")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--h", type=float, default=DEFAULT_H)

    sp = add("cdf", _cdf, "distribution function P(Y_s <= t)")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--h", type=float, default=DEFAULT_H)
    sp.add_argument("--t-max", dest="t_max", type=float, default=DEFAULT_T_MAX)

    sp = add("green", _green, "Green function G_theta(t)")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--table", type=float, nargs=3, metavar=("TMIN", "TMAX", "STEP"), default=None)

    sp = add("green-bar", _green_bar, "integrated Green function")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)

    sp = add("renewal-u", _renewal_u, "renewal density U(0..n_max)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--lam", "--lambda", dest="lam", type=float, default=None, help="overrides --theta")
    sp.add_argument("--n-max", "--nmax", dest="n_max", type=int, default=None)
    sp.add_argument("--law", choices=("harmonic", "pinning"), default="harmonic")

    sp = add("spacetime-u", _spacetime_u, "space-time renewal density at (n, x)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x1", type=int, default=0)
    sp.add_argument("--x2", type=int, default=0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--lam", "--lambda", dest="lam", type=float, default=None, help="overrides --theta")
    sp.add_argument("--law", choices=("polymer", "gaussian"), default="polymer")
    sp.add_argument("--c", type=float, default=0.5, help="variance per component for --law gaussian")

    sp = add("verify-renewal", _verify_renewal, "sharp renewal theorem check")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--Ns", type=_int_list, required=True)
    sp.add_argument("--tol", type=float, default=0.1)

    sp = add("verify-spacetime", _verify_spacetime, "space-time renewal theorem check (polymer law)")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--x1", type=float, default=0.0, help="rescaled position x / sqrt(N)")
    sp.add_argument("--x2", type=float, default=0.0)
    sp.add_argument("--Ns", type=_int_list, required=True)
    sp.add_argument("--tol", type=float, default=0.25)

    sp = add("bounds", _bounds, "sweep the renewal inequalities")
    sp.add_argument("--which", choices=("sharp-local", "fuk-nagaev", "lower-tail", "all"), default="all")
    sp.add_argument("--max", type=int, default=64, help="largest m, N, k and n in the sweep")

    sp = add("simulate", _simulate, "sample Y_s and the largest jump")
    _sim_args(sp)

    sp = add("test-scale", _test_scale, "scale-invariance KS test")
    _sim_args(sp, t_required=True)

    for name, handler, help_text in (
        ("pinning-m2", _pinning_m2, "pinning second moment"),
        ("polymer-m2", _polymer_m2, "directed-polymer second moment"),
    ):
        sp = add(name, handler, help_text)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--N", type=int, required=True)
        sp.add_argument("--theta", type=float, default=0.0)
        sp.add_argument("--disorder", choices=("gaussian", "rademacher"), default="gaussian")
        if name == "polymer-m2":
            sp.add_argument("--x1", type=int, default=0)
            sp.add_argument("--x2", type=int, default=0)

    sp = add("alpha", _alpha, "R_N and the second-order constant")
    sp.add_argument("--N", type=int, required=True)
    return parser


_GLOBAL = ("command", "out", "format", "threads")
_THREADED = ("simulate", "test-scale")


def resolve(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in _GLOBAL}
    from .montecarlo import default_threads

    threads = default_threads() if args.threads is None else args.threads
    if threads < 1:
        raise DomainError("--threads must be at least 1")
    out, form = args.out, args.format
    if out in ("csv", "json"):
        out, form = None, form or out
    elif out and form is None and out.endswith((".csv", ".json")):
        form = out.rsplit(".", 1)[1]
    return RunConfig(command=args.command, params=params, out=out, format=form,
                     seed=params.get("seed"), threads=threads)


def dispatch(cfg: RunConfig, stream=None) -> int:
    handler = HANDLERS[cfg.command]
    if cfg.command in _THREADED:
        result = handler(cfg.params, cfg.threads)
    else:
        result = handler(cfg.params)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            emit(cfg, result, fh)
    else:
        emit(cfg, result, stream or sys.stdout)
    if not result.ok:
        sys.stderr.write(f"dickman: {result.message}\n")
        return EXIT_VERIFY
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = resolve(argv)
        return dispatch(cfg)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except VerificationError as exc:
        sys.stderr.write(f"dickman: verification failed: {exc}\n")
        return EXIT_VERIFY
    except (DomainError, ValueError, OverflowError) as exc:
        sys.stderr.write(f"dickman: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
