"""Command-line entry point: ``seplab {series,alpha,orbit,splitting,check}``.

Exit codes: 0 success, 2 invalid configuration, 3 a computed check failed.
Output files are written atomically and depend only on the flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from gmpy2 import mpfr

from . import alpha as al
from .errors import InputError, InvariantFailure, PrecisionInsufficient, SeplabError
from .numeric import BITS_ENV, PrecisionContext, default_bits, fmt_decimal, fmt_hex
from .series import compute_formal_solution
from .splitting import MODELS, MapParams, SplittingLab, orbit, vertical_splitting

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3
MAX_SERIES_ORDER = 120


@dataclass(frozen=True)
class RunConfig:
    command: str
    order: int | None
    eps: str | None
    bits: int | None
    steps: int | None
    samples: int | None
    out_path: str | None
    format: str
    suite: str
    model: str
    quiet: bool


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".seplab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header_comment: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _say(cfg: RunConfig, msg: str) -> None:
    if not cfg.quiet:
        print(msg)


def _factored(p) -> str:
    """Monomial form, plus the (1 - u^2) factorization when it exists."""
    q, r = p.div_linear(1)
    q, r2 = q.div_linear(-1)
    if r or r2 or p.is_zero():
        return str(p)
    return f"{p} = (1 - u^2)({-q})"


def cmd_series(cfg: RunConfig) -> int:
    sol = compute_formal_solution(cfg.order)
    _write_atomic(cfg.out_path, sol.dumps())
    for k, p in enumerate(sol.polys[:4]):
        _say(cfg, f"A_{2 * k + 1} = {_factored(p) if k else p}")
    _say(cfg, f"wrote {cfg.out_path}")
    return EXIT_OK


def cmd_alpha(cfg: RunConfig) -> int:
    bits = cfg.bits or (int(os.environ[BITS_ENV]) if os.environ.get(BITS_ENV) else al.ALPHA_BITS)
    ctx = PrecisionContext(bits)
    table = al.compute_alpha_table(cfg.order, ctx)
    est = al.alpha_estimate(table, cfg.order, ctx)
    digits = 40
    lo, hi = est.lower, est.upper
    if cfg.format == "json":
        doc = {
            "order": cfg.order,
            "bits": bits,
            "rows": [{"n": r.n, "alpha_n": fmt_decimal(r.alpha_n, digits),
                      "beta_n_minus_2": fmt_decimal(r.beta, digits),
                      "gamma_n_minus_4": fmt_decimal(r.gamma, digits)} for r in table.rows],
            "partial_sum": fmt_decimal(est.value, digits),
            "tail_bound": fmt_decimal(est.tail, digits),
            "alpha_estimate": fmt_decimal(est.value, digits),
            "interval": [fmt_decimal(lo, digits), fmt_decimal(hi, digits)],
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        comment = (f"command=alpha order={cfg.order} bits={bits} "
                   f"alpha_estimate={fmt_decimal(est.value, digits)} tail_bound={fmt_decimal(est.tail, digits)}")
        rows = [(r.n, fmt_decimal(r.alpha_n, digits), fmt_decimal(r.beta, digits),
                 fmt_decimal(r.gamma, digits)) for r in table.rows]
        text = _csv_text(comment, ("n", "alpha_n", "beta_n_minus_2", "gamma_n_minus_4"), rows)
    _write_atomic(cfg.out_path, text)
    _say(cfg, f"alpha = {fmt_decimal(est.value, 15)} +- {fmt_decimal(est.tail, 3)} (N = {cfg.order})")
    _say(cfg, f"wrote {cfg.out_path}")
    if cfg.order >= 81:
        with ctx.scope():
            lo_ref, hi_ref = (mpfr(s) for s in al.ALPHA_INTERVAL)
            inside = lo_ref <= est.value <= hi_ref
        if not inside:
            _say(cfg, f"estimate is outside [{al.ALPHA_INTERVAL[0]}, {al.ALPHA_INTERVAL[1]}]")
            return EXIT_CHECK
    return EXIT_OK


def _map_params(cfg: RunConfig) -> MapParams:
    bits = cfg.bits or default_bits(cfg.eps)
    return MapParams.create(cfg.eps, bits)


def cmd_orbit(cfg: RunConfig) -> int:
    params = _map_params(cfg)
    ys = orbit(0, params.eps, cfg.steps, params)
    with params.ctx.scope():
        e2 = params.eps * params.eps
        rows = [(n, fmt_decimal(n * e2, 20), fmt_decimal(y, 20)) for n, y in enumerate(ys)]
    if cfg.format == "json":
        text = json.dumps({"eps": cfg.eps, "bits": params.ctx.bits, "steps": cfg.steps,
                           "y0": "0", "y1": cfg.eps,
                           "rows": [{"n": n, "n_eps2": a, "y_n": b} for n, a, b in rows]},
                          indent=1) + "\n"
    else:
        comment = f"command=orbit eps={cfg.eps} steps={cfg.steps} bits={params.ctx.bits} y0=0 y1={cfg.eps}"
        text = _csv_text(comment, ("n", "n_eps2", "y_n"), rows)
    _write_atomic(cfg.out_path, text)
    _say(cfg, f"wrote {len(rows)} rows to {cfg.out_path}")
    return EXIT_OK


def cmd_splitting(cfg: RunConfig) -> int:
    params = _map_params(cfg)
    ctx = params.ctx
    order = cfg.order or 81
    alpha = al.compute_alpha_table(order, PrecisionContext(max(ctx.bits, al.ALPHA_BITS))).alpha_estimate
    n = cfg.samples
    with ctx.scope():
        half = mpfr("0.5", ctx.bits)
        grid = [-half + k * (2 * half) / (n - 1) for k in range(n)]
    samples = vertical_splitting(params, grid, alpha, model=cfg.model, lab=SplittingLab(params))
    rows = [(cfg.eps, fmt_decimal(s.x, 20), fmt_decimal(s.t, 20), fmt_hex(s.measured),
             fmt_hex(s.predicted), fmt_decimal(s.ratio, 20)) for s in samples]
    columns = ("eps", "x", "t", "measured", "predicted", "ratio")
    if cfg.format == "json":
        text = json.dumps({"eps": cfg.eps, "bits": ctx.bits, "samples": n, "model": cfg.model,
                           "alpha_order": order, "alpha": fmt_decimal(alpha, 20),
                           "rows": [dict(zip(columns, r)) for r in rows]}, indent=1) + "\n"
    else:
        comment = (f"command=splitting eps={cfg.eps} bits={ctx.bits} samples={n} model={cfg.model} "
                   f"alpha_order={order} alpha={fmt_decimal(alpha, 20)}")
        text = _csv_text(comment, columns, rows)
    _write_atomic(cfg.out_path, text)
    _say(cfg, f"wrote {len(rows)} rows to {cfg.out_path}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    from .acceptance import run_suite

    all_ok = True
    for res in run_suite(cfg.suite):
        print(res.line(), flush=True)
        all_ok &= res.passed
    return EXIT_OK if all_ok else EXIT_CHECK


COMMANDS = {"series": cmd_series, "alpha": cmd_alpha, "orbit": cmd_orbit,
            "splitting": cmd_splitting, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seplab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("csv", "json"), default_fmt="csv"):
        sp.add_argument("--out", dest="out_path", help="output file (default: <command>.<format>)")
        sp.add_argument("--format", choices=fmt, default=default_fmt)
        sp.add_argument("--quiet", action="store_true", help="suppress progress lines")

    sp = sub.add_parser("series", help="formal solution coefficients as exact JSON")
    sp.add_argument("--order", type=int, default=80, help="even truncation order (<= 120)")
    common(sp, ("json",), "json")

    sp = sub.add_parser("alpha", help="alpha_n table and the alpha estimate")
    sp.add_argument("--order", type=int, default=81, help="odd summation cap N >= 15")
    sp.add_argument("--bits", type=int)
    common(sp, default_fmt="json")

    sp = sub.add_parser("orbit", help="orbit of the three-term recurrence from y0 = 0, y1 = eps")
    sp.add_argument("--eps", default="0.05")
    sp.add_argument("--steps", type=int, default=1600)
    sp.add_argument("--bits", type=int)
    common(sp)

    sp = sub.add_parser("splitting", help="measured vs predicted vertical splitting")
    sp.add_argument("--eps", default="0.4")
    sp.add_argument("--bits", type=int)
    sp.add_argument("--samples", type=int, default=64, help="abscissae evenly spaced on [-1/2, 1/2]")
    sp.add_argument("--order", type=int, default=81, help="alpha summation cap")
    sp.add_argument("--model", choices=sorted(MODELS), default="closed_form")
    common(sp)

    sp = sub.add_parser("check", help="run the acceptance criteria")
    sp.add_argument("--suite", choices=("all", "exact", "numeric"), default="all")
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    fmt = getattr(ns, "format", "json")
    out = getattr(ns, "out_path", None)
    if cmd != "check" and not out:
        out = f"{cmd}.{fmt}"
    cfg = RunConfig(cmd, getattr(ns, "order", None), getattr(ns, "eps", None),
                    getattr(ns, "bits", None), getattr(ns, "steps", None),
                    getattr(ns, "samples", None), out, fmt, getattr(ns, "suite", "all"),
                    getattr(ns, "model", "closed_form"), getattr(ns, "quiet", False))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.command == "series" and (cfg.order < 0 or cfg.order % 2 or cfg.order > MAX_SERIES_ORDER):
        raise InputError(f"series order must be even, between 0 and {MAX_SERIES_ORDER}")
    if cfg.command == "alpha" and (cfg.order < 15 or cfg.order % 2 == 0):
        raise InputError("alpha order must be odd and >= 15")
    if cfg.command == "splitting":
        if cfg.order < 15 or cfg.order % 2 == 0:
            raise InputError("alpha order must be odd and >= 15")
        if cfg.samples < 2:
            raise InputError("need at least two samples")
    if cfg.command == "orbit" and cfg.steps < 1:
        raise InputError("steps must be >= 1")
    if cfg.bits is not None:
        PrecisionContext(cfg.bits)
    if cfg.eps is not None:
        try:
            e = mpfr(cfg.eps, 128)
        except ValueError:
            raise InputError(f"eps must be a decimal number, got {cfg.eps!r}") from None
        if not e > 0:
            raise InputError("eps must be positive")
        if cfg.command in ("orbit", "splitting"):
            need = default_bits(cfg.eps)
            if cfg.bits is not None and cfg.bits < need:
                raise InputError(f"eps = {cfg.eps} needs at least {need} bits")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
    except InputError as exc:
        print(f"seplab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg)
    except (InvariantFailure, PrecisionInsufficient) as exc:
        print(f"seplab: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except InputError as exc:
        print(f"seplab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeplabError as exc:
        print(f"seplab: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
