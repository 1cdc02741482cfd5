"""Command-line front end.

Exit codes: 0 success, 1 a validation or check failed, 2 bad input.
All numbers are printed as exact ``num/den``; ``--decimal k`` adds a display column.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from ._backend import get_backend, set_backend, set_threads
from .contraction import plan_contraction
from .counterexample import (
    CounterexampleConfig,
    divergence_table,
    increments_positive,
    report_csv,
    run as run_counterexample,
    table_csv,
)
from .dyadic import square
from .errors import DimensionMismatch, EntangledT1Error
from .form import check_duality, evaluate_adjoint, evaluate_form
from .graph import BipartiteGraph, Signature, all_signatures, classify_signature, exponent_thresholds, feasibility_witness
from .kernel import PerfectKernel, size_report, validate_diagonal_constancy
from .paraproduct import haar_decomposition, reconstruct_check
from .step import StepFunction
from .t1 import adjoint_on_ones, local_constancy_check, restricted_test, squares_in, t1_bmo, weak_boundedness_scan


class InputError(EntangledT1Error):
    pass


@dataclass
class RunManifest:
    subcommand: str
    inputs: dict[str, str] = field(default_factory=dict)
    parameters: dict[str, object] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def q(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


class Reporter:
    """Collects output lines; ``--decimal`` appends display-only approximations."""

    def __init__(self, decimal: int | None):
        self.decimal = decimal
        self.lines: list[str] = []

    def num(self, v: Fraction) -> str:
        text = q(v)
        if self.decimal:
            text += f" ({float(v):.{self.decimal}f})"
        return text

    def __call__(self, line: str = ""):
        self.lines.append(line)

    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")


def _read(path: str, manifest: RunManifest, role: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{role}: no such file {path}")
    manifest.inputs[f"{role}:{p.name}"] = digest(p)
    return p.read_text()


def _edge(text: str) -> tuple[int, int]:
    try:
        u, v = (int(t) for t in text.replace("(", "").replace(")", "").split(","))
    except ValueError as exc:
        raise InputError(f"edge must look like 'u,v', got {text!r}") from exc
    return u, v


def parse_inputs(args, manifest: RunManifest, need_functions: bool = True):
    """Kernel, graph and per-edge functions named on the command line, cross-checked."""
    kernel = PerfectKernel.from_text(_read(args.kernel, manifest, "kernel")) if getattr(args, "kernel", None) else None
    graph = BipartiteGraph.from_text(_read(args.graph, manifest, "graph")) if getattr(args, "graph", None) else None
    if kernel is not None and graph is not None and (kernel.m, kernel.n) != (graph.m, graph.n):
        raise DimensionMismatch(f"kernel is ({kernel.m},{kernel.n}) but graph is ({graph.m},{graph.n})")
    fs = {}
    for item in getattr(args, "function", None) or []:
        if "=" not in item:
            raise InputError(f"--function expects 'u,v=path', got {item!r}")
        e, path = item.split("=", 1)
        fs[_edge(e)] = StepFunction.from_text(_read(path, manifest, f"function{_edge(e)}"))
    if need_functions and graph is not None:
        skip = {_edge(args.edge)} if getattr(args, "edge", None) else set()
        missing = set(graph.edges) - set(fs) - skip
        if missing:
            raise InputError(f"missing --function for edges {sorted(missing)}")
    return kernel, graph, fs


# subcommands

def cmd_validate_kernel(args, out: Reporter, manifest: RunManifest) -> int:
    kernel, _, _ = parse_inputs(args, manifest, False)
    rep = validate_diagonal_constancy(kernel)
    out(f"valid: {str(rep.valid).lower()}")
    out(f"scales checked: {rep.coarsest_scale}..{rep.finest_scale - 1}")
    out(f"cubes checked: {rep.cubes_checked}")
    for cube in rep.violations[:20]:
        out(f"violation: scale {cube.scale} indices {' '.join(map(str, cube.indices))}")
    if kernel.dim >= 3:
        size = size_report(kernel)
        out(f"size constant: {out.num(size.constant)}")
        if size.witness is not None:
            out(f"size witness cell: {' '.join(map(str, size.witness))}")
    return 0 if rep.valid else 1


def cmd_decompose(args, out: Reporter, manifest: RunManifest) -> int:
    kernel, graph, fs = parse_inputs(args, manifest, False)
    sigs = [Signature.parse(args.signature, kernel.m)] if args.signature else None
    dec = haar_decomposition(kernel, sigs, full=args.full)
    status = 0
    for s, f in dec.fields.items():
        if args.out_dir:
            path = Path(args.out_dir) / f"coeff_{s.code()}.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(f.to_text())
            manifest.outputs.append(str(path))
        else:
            out(f.to_text().rstrip("\n"))
        if args.full:
            bad = dec.off_diagonal[s]
            out(f"# {s.code()}: {len(bad)} nonzero unequal-interval coefficients")
            status |= 1 if bad else 0
    if graph is not None and fs:
        rep = reconstruct_check(kernel, graph, fs, dec if sigs is None else None)
        out(f"reconstruction residual: {out.num(rep.residual)}")
        status |= 0 if rep.ok else 1
    return status


def cmd_evaluate(args, out: Reporter, manifest: RunManifest) -> int:
    kernel, graph, fs = parse_inputs(args, manifest)
    value = evaluate_form(kernel, graph, fs, plan=args.plan)
    out(f"form: {out.num(value)}")
    if args.duality:
        ok, res = check_duality(kernel, graph, fs)
        out(f"duality residual: {out.num(res)}")
        return 0 if ok else 1
    return 0


def cmd_adjoint(args, out: Reporter, manifest: RunManifest) -> int:
    kernel, graph, fs = parse_inputs(args, manifest)
    T = evaluate_adjoint(kernel, graph, _edge(args.edge), fs, plan=args.plan)
    out(T.to_text().rstrip("\n"))
    return 0


def cmd_test_t1(args, out: Reporter, manifest: RunManifest) -> int:
    kernel, graph, _ = parse_inputs(args, manifest, False)
    region = square(args.region_scale, 0, 0) if args.region_scale is not None else _covering_square(kernel)
    edges = [_edge(args.edge)] if args.edge else graph.sorted_edges()
    wbp = weak_boundedness_scan(kernel, region, args.max_depth)
    w = wbp.witness
    out(f"region: scale {region.scale} indices {region.indices}")
    out(f"wbp max ratio: {out.num(wbp.max_ratio)}" + (f" at scale {w.scale} indices {w.indices}" if w else ""))
    status = 0
    squares = list(squares_in(region, min(args.max_depth, max(kernel.resolution - region.scale, 0))))
    out("edge,bmo_squared,box_independent,restricted_max,local_constancy")
    for e in edges:
        t1 = t1_bmo(kernel, graph, e)
        ones = adjoint_on_ones(kernel, graph, e)
        rmax = max((restricted_test(kernel, graph, e, Q) for Q in squares), default=Fraction(0))
        local = all(local_constancy_check(kernel, graph, e, Q, ones)[0] for Q in squares)
        out(f"({e[0]};{e[1]}),{out.num(t1.bmo_squared)},{str(t1.box_independent).lower()},{out.num(rmax)},"
            f"{'pass' if local else 'fail'}")
        if not (local and t1.box_independent):
            status = 1
    out(f"squares scanned per edge: {len(squares)}")
    return status


def _covering_square(kernel: PerfectKernel):
    box = kernel.body.support_box()
    if box is None:
        return square(0, 0, 0)
    R = kernel.resolution
    xs = [b for b in box[: kernel.m]]
    ys = [b for b in box[kernel.m:]]
    lo = (min(l for l, _ in xs), min(l for l, _ in ys))
    hi = (max(h for _, h in xs) - 1, max(h for _, h in ys) - 1)
    k = R
    while (lo[0] >> (R - k), lo[1] >> (R - k)) != (hi[0] >> (R - k), hi[1] >> (R - k)):
        k -= 1
    return square(k, lo[0] >> (R - k), lo[1] >> (R - k))


def cmd_exponents(args, out: Reporter, manifest: RunManifest) -> int:
    _, graph, _ = parse_inputs(args, manifest, False)
    d = exponent_thresholds(graph)
    out("d: " + " ".join(f"({i},{j})={d[(i, j)]}" for i, j in sorted(d)))
    p = feasibility_witness(d)
    out("p: " + " ".join(f"({i},{j})={q(p[(i, j)])}" for i, j in sorted(p)))
    return 0


def cmd_classify(args, out: Reporter, manifest: RunManifest) -> int:
    _, graph, _ = parse_inputs(args, manifest, False)
    out("signature,S,T,class,cancellative")
    for s in all_signatures(graph.m, graph.n):
        c = classify_signature(graph, s)
        S = " ".join(map(str, sorted(s.S)))
        T = " ".join(map(str, sorted(s.T)))
        out(f"{s.code()},{{{S}}},{{{T}}},{c.value},{str(c.cancellative).lower()}")
    return 0


def cmd_counterexample(args, out: Reporter, manifest: RunManifest) -> int:
    if args.table:
        rows = divergence_table(args.table, args.n)
        out(table_csv(rows, args.decimal).rstrip("\n"))
        return 0 if all(r.hypotheses_hold for r in rows) and increments_positive(rows) else 1
    rep = run_counterexample(CounterexampleConfig(args.r, args.n), dense_check=args.dense_check or None)
    out(report_csv(rep).rstrip("\n"))
    return 0 if rep.hypotheses_hold and rep.matches_corrected and rep.dense_ok is not False else 1


def cmd_bench_contraction(args, out: Reporter, manifest: RunManifest) -> int:
    from .generators import random_inputs, random_perfect_kernel

    if args.graph:
        _, graph, _ = parse_inputs(args, manifest, False)
    else:
        from .graph import cup_graph

        graph = cup_graph()
    rng = random.Random(args.seed)
    kernel = random_perfect_kernel(rng, graph.m, graph.n, args.resolution, constant=True)
    fs = random_inputs(rng, graph, args.resolution)
    cells = 1 << args.resolution
    plan = plan_contraction(graph, cells, "dense")
    out(plan.describe())
    timings = {}
    values = {}
    for mode in ("naive", "auto", "greedy"):
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            values[mode] = evaluate_form(kernel, graph, fs, plan=mode)
        timings[mode] = (time.perf_counter() - t0) / args.repeat
    for mode, t in timings.items():
        out(f"{mode}: {t * 1e3:.3f} ms")
    same = len(set(values.values())) == 1
    out(f"backend: {get_backend()}")
    out(f"values agree: {str(same).lower()}")
    return 0 if same else 1


COMMANDS = {
    "validate-kernel": cmd_validate_kernel,
    "decompose": cmd_decompose,
    "evaluate": cmd_evaluate,
    "adjoint": cmd_adjoint,
    "test-t1": cmd_test_t1,
    "exponents": cmd_exponents,
    "classify": cmd_classify,
    "counterexample": cmd_counterexample,
    "bench-contraction": cmd_bench_contraction,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", type=int, default=None, metavar="K", help="add K-digit display values")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--backend", choices=("numba", "numpy"), default=None)
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--manifest", default=None, help="write a JSON run manifest here")

    p = argparse.ArgumentParser(prog="entangled-t1", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("validate-kernel", "check diagonal constancy and the size constant")
    s.add_argument("--kernel", required=True)

    s = add("decompose", "Haar coefficient fields of a kernel")
    s.add_argument("--kernel", required=True)
    s.add_argument("--signature", default=None, help="e.g. h11h; default all")
    s.add_argument("--full", action="store_true", help="also compute unequal-interval coefficients")
    s.add_argument("--out-dir", default=None)
    s.add_argument("--graph", default=None, help="with --function: run the reconstruction check")
    s.add_argument("--function", action="append", metavar="U,V=PATH")

    for name, help_ in (("evaluate", "value of the form"), ("adjoint", "adjoint on one edge")):
        s = add(name, help_)
        s.add_argument("--kernel", required=True)
        s.add_argument("--graph", required=True)
        s.add_argument("--function", action="append", metavar="U,V=PATH")
        s.add_argument("--plan", default="auto", choices=("auto", "naive", "optimal", "greedy"))
        if name == "adjoint":
            s.add_argument("--edge", required=True)
        else:
            s.add_argument("--duality", action="store_true")

    s = add("test-t1", "weak boundedness, T(1) in BMO, restricted tests")
    s.add_argument("--kernel", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--edge", default=None)
    s.add_argument("--max-depth", type=int, default=3)
    s.add_argument("--region-scale", type=int, default=None, help="scan [0,2^-k)^2 instead of the covering square")

    for name, help_ in (("exponents", "per-edge exponent thresholds"), ("classify", "paraproduct classes")):
        s = add(name, help_)
        s.add_argument("--graph", required=True)

    s = add("counterexample", "the degenerate star-graph family")
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--table", type=int, default=None, metavar="R_MAX")
    s.add_argument("--dense-check", action="store_true")

    s = add("bench-contraction", "naive vs planned evaluation on a random instance")
    s.add_argument("--graph", default=None)
    s.add_argument("--resolution", type=int, default=3)
    s.add_argument("--repeat", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.backend:
        set_backend(args.backend)
    threads = args.threads or (int(os.environ["ENTANGLED_T1_THREADS"]) if os.environ.get("ENTANGLED_T1_THREADS") else None)
    set_threads(threads)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "output", "manifest")}
    manifest = RunManifest(args.command, parameters=params)
    out = Reporter(args.decimal)
    try:
        status = COMMANDS[args.command](args, out, manifest)
    except (EntangledT1Error, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = out.text()
    if args.output:
        Path(args.output).write_text(text)
        manifest.outputs.append(args.output)
    else:
        sys.stdout.write(text)
    if args.manifest:
        Path(args.manifest).write_text(manifest.to_json())
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
