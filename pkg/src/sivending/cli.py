"""Command-line driver: ``solve``, ``figure`` and ``validate``.

Exit status: 0 on success, 1 when validation fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from sivending import __version__
from sivending import functionals as fl
from sivending.acceptance import run as run_acceptance
from sivending.decoder import InfeasibleError, greedy_rate, lossless_rate_decoder, timeshare_bound
from sivending.documents import BUNDLED, DocumentError, ProblemDocument, config_digest, load
from sivending.encoder import encoder_bounds, encoder_lossless_rate, gaussian_rdc, markov_rdc
from sivending.figures import FIGURES
from sivending.problem import GaussianSpec
from sivending.simplex import SolverConfig, sweep_functional

INFEASIBLE = "infeasible"


def _guard(fn, *args):
    try:
        return fn(*args)
    except InfeasibleError:
        return math.inf


def _swept(doc: ProblemDocument, fn, cfg, baselines=None):
    curve = sweep_functional(fn, doc.d, doc.c, cfg, seed_sweep=False)
    rows = []
    for d, c, rate, _, ok in curve.rows:
        extra = baselines(d, c) if baselines else ()
        rows.append((d, c, rate if ok else math.inf, *extra))
    return rows


def solve_rows(doc: ProblemDocument, cfg: SolverConfig):
    """Columns and rows (one per ``(d, c)`` target, costs varying slowest) for a document."""
    spec, mode = doc.spec, doc.mode
    points = [(d, c) for c in doc.c for d in doc.d]
    if mode == "gaussian":
        var_x, var_n = doc.gaussian
        return ("d", "c", "rate"), [(d, c, gaussian_rdc(GaussianSpec(var_x, var_n, d, c))) for d, c in points]
    model = spec.source_model
    if mode == "decoder":
        def baselines(d, c):
            return _guard(greedy_rate, spec, d, cfg), _guard(timeshare_bound, spec, d, c, cfg)
        return (("d", "c", "rate", "greedy", "timeshare"),
                _swept(doc, fl.LabelDecoder(model), cfg, baselines))
    if mode == "decoder-independent":
        return ("d", "c", "rate"), _swept(doc, fl.IndependentActions(model), cfg)
    if mode in ("causal", "indirect"):
        return ("d", "c", "rate"), _swept(doc, fl.LabelDecoder(model, causal=mode == "causal"), cfg)
    if mode == "encoder-lossless":
        decoder_spec = spec.with_mode("decoder")
        rows = [(0.0, c, _guard(encoder_lossless_rate, spec, c, cfg),
                 _guard(lossless_rate_decoder, decoder_spec, c, cfg)) for c in doc.c]
        return ("d", "c", "rate", "decoder_actions"), rows
    if mode == "encoder-markov":
        return ("d", "c", "rate"), [(d, c, _guard(markov_rdc, spec, d, c, cfg)) for d, c in points]
    rows = []
    for d, c in points:
        try:
            r = encoder_bounds(spec, d, c, cfg)
            rows.append((d, c, r.lower, r.upper_closed_switch, r.upper_open_switch, float(r.certified_exact)))
        except InfeasibleError:
            rows.append((d, c, math.inf, math.inf, math.inf, 0.0))
    return ("d", "c", "lower", "upper_closed_switch", "upper_open_switch", "certified_exact"), rows


def _cell(x) -> str:
    return INFEASIBLE if math.isinf(x) else f"{x:.10g}"


def emit(columns, rows, meta, fmt="csv") -> str:
    """CSV with a ``#`` metadata header, or a JSON object."""
    if fmt == "json":
        clean = [[None if math.isinf(v) else v for v in row] for row in rows]
        return json.dumps({"meta": meta, "columns": list(columns), "rows": clean}, indent=2) + "\n"
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(_cell(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _overrides(args):
    return dict(seed=args.seed, restarts=args.restarts, grid_resolution=args.grid_resolution)


def _grid_arg(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values or sorted(values) != values:
        raise argparse.ArgumentTypeError("grid must be a nonempty ascending list")
    return tuple(values)


def cmd_solve(args) -> int:
    doc = load(args.problem)
    if args.d is not None or args.c is not None:
        doc = ProblemDocument(doc.name, doc.mode, doc.spec, args.d or doc.d, args.c or doc.c,
                              doc.gaussian, doc.alphabets, doc.solver)
    cfg = doc.config(**_overrides(args))
    columns, rows = solve_rows(doc, cfg)
    meta = {"tool": f"sivending {__version__}", "instance": doc.name, "mode": doc.mode,
            "config": config_digest(cfg)}
    _write(emit(columns, rows, meta, args.format), args.out)
    return 0


def cmd_figure(args) -> int:
    cfg = SolverConfig()
    extra = {k: v for k, v in _overrides(args).items() if v is not None}
    if extra:
        from dataclasses import replace

        cfg = replace(cfg, **extra)
    fn = FIGURES[args.which]
    columns, rows = fn(cfg=cfg) if args.which in ("fig3", "fig4") else fn()
    meta = {"tool": f"sivending {__version__}", "instance": args.which, "config": config_digest(cfg)}
    _write(emit(columns, rows, meta, args.format), args.out)
    return 0


def cmd_validate(args) -> int:
    cfg = SolverConfig()
    extra = {k: v for k, v in _overrides(args).items() if v is not None}
    if extra:
        from dataclasses import replace

        cfg = replace(cfg, **extra)
    checks = run_acceptance(cfg, quick=args.quick, echo=print)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} criteria passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for randomized restarts")
    common.add_argument("--restarts", type=int, default=None, help="restarts for non-convex solves")
    common.add_argument("--grid-resolution", type=int, default=None, help="grid oracle resolution")
    parser = argparse.ArgumentParser(prog="sivending", parents=[common],
                                     description="Rate-distortion-cost tradeoffs with action-dependent side information.")
    parser.add_argument("--version", action="version", version=f"sivending {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="solve a problem document")
    solve.add_argument("problem", help=f"path to a JSON document or a bundled name ({', '.join(BUNDLED)})")
    solve.add_argument("--d", type=_grid_arg, default=None, help="distortion grid, e.g. 0,0.1,0.2")
    solve.add_argument("--c", type=_grid_arg, default=None, help="cost grid")
    solve.add_argument("--out", default=None, help="output file (default stdout)")
    solve.add_argument("--format", choices=("csv", "json"), default="csv")
    solve.set_defaults(run=cmd_solve)

    figure = sub.add_parser("figure", parents=[common], help="emit curve data for a figure")
    figure.add_argument("which", choices=sorted(FIGURES))
    figure.add_argument("--out", default=None)
    figure.add_argument("--format", choices=("csv", "json"), default="csv")
    figure.set_defaults(run=cmd_figure)

    validate = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    validate.add_argument("--quick", action="store_true", help="reduced subset (under a minute)")
    validate.set_defaults(run=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (DocumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
