"""Command-line interface: modulus, sweep, compare, and gradient reports.

Results go to stdout (JSON or CSV); diagnostics go to stderr.  Exit codes:
0 success, 1 input error, 2 solver nonconvergence, 3 internal invariant
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .analysis import (
    DEFAULT_P_GRID,
    _normalized,
    finite_difference_gradient,
    p_sweep,
)
from .errors import ConvergenceError, InputError, InternalError, ModulusError
from .families import ConnectingFamily, ViaVertexFamily, WalkFamily
from .graph import Graph
from .io import FORMATS, guess_format, parse_graph
from .oracles import effective_conductance, max_flow_min_cut, shortest_hops
from .solver import ModulusResult, modulus

SWEEP_COLUMNS = ("p", "value", "normalized", "dual_lower", "primal_upper", "gap", "iterations")


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise InputError(f"malformed exponent {text!r}") from None


def _p_token(p: float):
    return "inf" if math.isinf(p) else p


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _load_graph(args) -> Graph:
    fmt = args.format or guess_format(args.graph)
    try:
        with open(args.graph, "rb") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.graph!r}: {exc}") from None
    return parse_graph(text, fmt)


def _build_family(graph: Graph, args) -> WalkFamily:
    if getattr(args, "via", None):
        return ViaVertexFamily(graph, args.source, args.via, args.target)
    return ConnectingFamily(graph, args.source, args.target)


def _walk_key(walk) -> str:
    return ",".join(walk.vertex_labels)


def _edge_key(edge: tuple[str, str]) -> str:
    return f"{edge[0]},{edge[1]}"


def _result_payload(graph: Graph, result: ModulusResult) -> dict:
    return {
        "p": _p_token(result.p),
        "value": result.value,
        "rho_star": {
            _edge_key(edge): float(v)
            for edge, v in zip(graph.edges, result.rho_star.values)
        },
        "lambda": {
            _walk_key(w): float(weight)
            for w, weight in zip(result.active_walks, result.dual_weights)
        },
        "dual_lower": result.dual_lower,
        "primal_upper": result.primal_upper,
        "gap": result.gap,
        "iterations": result.iterations,
    }


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _emit_csv(header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    sys.stdout.write("\n".join(lines) + "\n")


def _cmd_modulus(args) -> int:
    graph = _load_graph(args)
    family = _build_family(graph, args)
    result = modulus(graph, family, _parse_p(args.p), args.tol)
    if args.output == "json":
        _emit_json(_result_payload(graph, result))
    else:
        row = (
            _p_token(result.p),
            result.value,
            _normalized(result.value, result.p, graph.sigma_total),
            result.dual_lower,
            result.primal_upper,
            result.gap,
            result.iterations,
        )
        _emit_csv(SWEEP_COLUMNS, [row])
    return 0


def _cmd_sweep(args) -> int:
    graph = _load_graph(args)
    family = _build_family(graph, args)
    if args.p_list:
        grid = [_parse_p(tok) for tok in args.p_list.split(",") if tok.strip()]
    else:
        grid = list(DEFAULT_P_GRID)
    rows = p_sweep(graph, family, grid, args.tol)
    if args.output == "json":
        payload = [
            {
                "p": _p_token(r.p),
                "value": r.value,
                "normalized": r.normalized,
                "dual_lower": r.dual_lower,
                "primal_upper": r.primal_upper,
                "gap": r.gap,
                "iterations": r.iterations,
                "monotone_ok": r.monotone_ok,
                "normalized_ok": r.normalized_ok,
                "error": r.error,
            }
            for r in rows
        ]
        _emit_json({"rows": payload})
    else:
        table = [
            (
                _p_token(r.p),
                r.value,
                r.normalized,
                r.dual_lower,
                r.primal_upper,
                r.gap,
                r.iterations,
            )
            for r in rows
        ]
        _emit_csv(SWEEP_COLUMNS, table)
    return 0


def _cmd_compare(args) -> int:
    graph = _load_graph(args)
    family = ConnectingFamily(graph, args.source, args.target)

    flow = max_flow_min_cut(graph, args.source, args.target)
    res1 = modulus(graph, family, 1.0, args.tol)
    conductance = effective_conductance(graph, args.source, args.target)
    res2 = modulus(graph, family, 2.0, args.tol)
    hops = shortest_hops(graph, args.source, args.target)
    res_inf = modulus(graph, family, math.inf, args.tol)
    inv_hops = 0.0 if hops is None else 1.0 / hops

    entries = [
        ("max_flow_min_cut", 1.0, res1.value, flow.value),
        ("effective_conductance", 2.0, res2.value, conductance),
        ("reciprocal_shortest_hops", math.inf, res_inf.value, inv_hops),
    ]
    if args.output == "json":
        payload = {
            name: {
                "p": _p_token(p),
                "modulus": mod_value,
                "reference": ref,
                "delta": abs(mod_value - ref),
            }
            for name, p, mod_value, ref in entries
        }
        _emit_json(payload)
    else:
        rows = [
            (name, _p_token(p), mod_value, ref, abs(mod_value - ref))
            for name, p, mod_value, ref in entries
        ]
        _emit_csv(("quantity", "p", "modulus", "reference", "delta"), rows)
    return 0


def _cmd_gradient(args) -> int:
    graph = _load_graph(args)
    family = _build_family(graph, args)
    p = _parse_p(args.p)
    result = modulus(graph, family, p, args.tol)
    grad = result.rho_star.values**p
    fd = finite_difference_gradient(
        graph, family, p, tol=args.tol, rel_step=args.fd_step
    )
    delta = np.abs(grad - fd)
    if args.output == "json":
        _emit_json(
            {
                "p": _p_token(p),
                "value": result.value,
                "gradient": {
                    _edge_key(e): float(g) for e, g in zip(graph.edges, grad)
                },
                "finite_difference": {
                    _edge_key(e): float(g) for e, g in zip(graph.edges, fd)
                },
                "abs_delta": {
                    _edge_key(e): float(d) for e, d in zip(graph.edges, delta)
                },
            }
        )
    else:
        rows = [
            (tail, head, float(s), float(g), float(f), float(d))
            for (tail, head), s, g, f, d in zip(
                graph.edges, graph.sigma, grad, fd, delta
            )
        ]
        _emit_csv(
            ("tail", "head", "sigma", "gradient", "finite_difference", "abs_delta"),
            rows,
        )
    return 0


def _add_common(sub, *, with_via=True) -> None:
    sub.add_argument("--graph", required=True, help="path to the graph document")
    sub.add_argument("--format", choices=FORMATS, help="input format (default: by extension)")
    sub.add_argument("--source", required=True)
    sub.add_argument("--target", required=True)
    if with_via:
        sub.add_argument("--via", help="restrict to walks passing through this vertex")
    sub.add_argument("--tol", type=float, default=1e-8)
    sub.add_argument("--output", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmodulus",
        description="p-modulus of walk families on weighted graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mod = sub.add_parser("modulus", help="modulus at a single exponent")
    _add_common(mod)
    mod.add_argument("--p", required=True, help="exponent, a number or 'inf'")
    mod.set_defaults(func=_cmd_modulus)

    sweep = sub.add_parser("sweep", help="modulus over an ascending exponent grid")
    _add_common(sweep)
    sweep.add_argument(
        "--p-list",
        help="comma-separated ascending exponents, e.g. '1,2,4,inf' (default grid otherwise)",
    )
    sweep.set_defaults(func=_cmd_sweep)

    comp = sub.add_parser(
        "compare",
        help="modulus at p in {1,2,inf} against max-flow, conductance, and hop count",
    )
    _add_common(comp, with_via=False)
    comp.set_defaults(func=_cmd_compare)

    grad = sub.add_parser("gradient", help="weight gradient and finite-difference check")
    _add_common(grad)
    grad.add_argument("--p", required=True, help="finite exponent greater than 1")
    grad.add_argument("--fd-step", type=float, default=1e-4)
    grad.set_defaults(func=_cmd_gradient)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InternalError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except ModulusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
