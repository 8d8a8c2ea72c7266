"""Command line entry point: ``magmacheck <command> ...``.

Exit codes: 0 when the check passes (identity holds, structure accepted,
detector found nothing), 1 when it does not (fails, rejected, pattern
found), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import algebra, detect, expr, verify
from .core import MagmaError, Structure, format_structure, load_structure, make_zn
from .reduce import identities as rid
from .reduce import patterns as rpat
from .reduce.behrend import behrend_partition

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_OPS = ("+", "*", "o1", "o2", "o3", "o4")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    parameters: dict = field(default_factory=dict)
    regime: str | None = None
    engine: str | None = None
    verdict: str | None = None
    witness: object = None
    err_bound: float | None = None
    wall_time_ms: float = 0.0
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_plain(asdict(self)), sort_keys=True)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def default_seed() -> int:
    raw = os.environ.get("MAGMA_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MAGMA_SEED must be an integer, got {raw!r}") from None


def _seed(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else default_seed()


def _emit(args, report: RunReport, text: str):
    if getattr(args, "json", False):
        print(report.to_json())
    else:
        print(text)


def _ops_list(raw: str | None, s: Structure | None = None) -> tuple:
    if raw:
        return tuple(t for t in raw.split(",") if t)
    if s is not None:
        return tuple(s.ops)
    return DEFAULT_OPS


# --- verify / classify / fields / count ----------------------------------


def cmd_verify(args) -> int:
    s = load_structure(args.structure)
    ident = expr.parse_identity(args.identity, _ops_list(args.ops, s))
    seed = _seed(args)
    cfg = verify.FieldConfig(p=args.prime, trials=args.trials, seed=seed)
    t0 = time.perf_counter()
    if args.engine == "brute":
        v = verify.brute_force_verify(s, ident, threads=args.threads)
    elif args.engine == "freivalds":
        add, mul = _distributive_ops(ident)
        v = verify.freivalds_distributivity(s, cfg, add=add, mul=mul)
    else:
        v = verify.verify_identity(s, ident, cfg)
    details = {}
    if not v.holds and v.witness is None and args.witness:
        w = verify.brute_force_verify(s, ident, threads=args.threads)
        v = verify.Verdict(v.holds, v.err_bound, w.witness, v.reason, v.engine, v.regime)
        details["witness_search"] = "brute"
    ms = (time.perf_counter() - t0) * 1000
    report = RunReport("verify", {"structure": str(args.structure), "identity": args.identity,
                                  "engine": args.engine, "trials": args.trials, "p": args.prime},
                       str(v.regime) if v.regime is not None else None, v.engine, v.outcome,
                       v.witness, v.err_bound, ms, seed, details)
    text = v.outcome
    if v.witness is not None:
        text += " witness=" + ",".join(str(x) for x in v.witness)
    if v.holds and v.err_bound:
        text += f" err<={v.err_bound:.3g}"
    _emit(args, report, text)
    return EXIT_OK if v.holds else EXIT_FAIL


def _distributive_ops(ident) -> tuple[str, str]:
    """(add, mul) when ident is a*(b+c) = (a*b)+(a*c) up to symbol choice."""
    if isinstance(ident, expr.Equation):
        lhs, rhs = ident.lhs, ident.rhs
        if isinstance(lhs, expr.Node) and isinstance(lhs.right, expr.Node) and isinstance(rhs, expr.Node):
            mul, add = lhs.op, lhs.right.op
            want = expr.parse_identity(f"a {mul} (b {add} c) = (a {mul} b) {add} (a {mul} c)", (add, mul))
            if want == ident:
                return add, mul
    raise UsageError("the freivalds engine only checks left distributivity a*(b+c)=(a*b)+(a*c)")


def cmd_classify(args) -> int:
    ident = expr.parse_identity(args.identity, _ops_list(args.ops))
    try:
        regime = str(expr.classify_identity(ident))
    except expr.SubexpressionPair:
        regime = "unclassified"
    report = RunReport("classify", {"identity": args.identity}, regime=regime)
    _emit(args, report, regime)
    return EXIT_OK


def cmd_check_field(args) -> int:
    s = load_structure(args.structure)
    t0 = time.perf_counter()
    v = algebra.field_verify(s, args.add, args.mul)
    return _report_accept(args, "check-field", v, t0, None)


def cmd_check_ring(args) -> int:
    s = load_structure(args.structure)
    seed = _seed(args)
    t0 = time.perf_counter()
    v = algebra.ring_verify(s, verify.FieldConfig(seed=seed), args.require_unital, args.add, args.mul)
    return _report_accept(args, "check-ring", v, t0, seed)


def _report_accept(args, command, v, t0, seed) -> int:
    ms = (time.perf_counter() - t0) * 1000
    verdict = "accept" if v.holds else "reject"
    report = RunReport(command, {"structure": str(args.structure)}, None, v.engine, verdict,
                       v.witness, v.err_bound, ms, seed, {"reason": v.reason})
    text = verdict if v.holds else f"reject: {v.reason}"
    _emit(args, report, text)
    return EXIT_OK if v.holds else EXIT_FAIL


def cmd_count(args) -> int:
    s = load_structure(args.structure)
    t0 = time.perf_counter()
    c = verify.count_distributive_triples(s, args.add, args.mul)
    report = RunReport("count", {"structure": str(args.structure)}, details={"count": c, "n": s.n},
                       wall_time_ms=(time.perf_counter() - t0) * 1000)
    _emit(args, report, str(c))
    return EXIT_OK


# --- detect -----------------------------------------------------------------


def _need(items, count, what):
    if len(items) != count:
        raise UsageError(f"{what} needs {count} entries in the file, got {len(items)}")
    return items


def _run_detector(kind: str, text: str, k: int):
    if kind == "kap":
        A = detect.parse_intsets(text)[0]
        return detect.detect_kap(A, k)
    if kind == "multi-kap":
        return detect.detect_multichromatic_kap(detect.parse_intsets(text))
    if kind == "square":
        (M,) = _need(detect.parse_bitmats(text), 1, "square")
        return detect.detect_square(M)
    if kind == "multi-square":
        return detect.detect_multichromatic_square(*_need(detect.parse_bitmats(text), 4, "multi-square"))
    if kind == "multi-T":
        return detect.detect_multichromatic_T(*_need(detect.parse_bitmats(text), 4, "multi-T"))
    if kind == "triangle":
        (M,) = _need(detect.parse_bitmats(text), 1, "triangle")
        return detect.detect_triangle(M.bits)
    if kind == "zero-triangle":
        if text.startswith("wgraph"):
            return detect.detect_zero_triangle_graph(detect.parse_wgraph(text))
        return detect.detect_zero_triangle(detect.parse_tripartite(text))
    if kind == "hyperclique":
        return detect.detect_hyperclique(detect.parse_hypergraph(text))
    if kind == "foursum":
        lists = _need(detect.parse_intlists(text), 4, "foursum")
        return detect.detect_foursum(*lists)
    raise UsageError(f"unknown detector {kind!r}")


DETECTORS = ("kap", "multi-kap", "square", "multi-square", "multi-T", "triangle", "zero-triangle",
             "hyperclique", "foursum")


def cmd_detect(args) -> int:
    text = detect.read_text(args.instance)
    t0 = time.perf_counter()
    w = _run_detector(args.kind, text, args.k)
    ms = (time.perf_counter() - t0) * 1000
    found = w is not None
    report = RunReport("detect", {"kind": args.kind, "instance": str(args.instance), "k": args.k},
                       verdict="found" if found else "none", witness=w, wall_time_ms=ms)
    _emit(args, report, ("found " + " ".join(str(int(x)) for x in w)) if found else "none")
    return EXIT_FAIL if found else EXIT_OK


# --- generate ---------------------------------------------------------------


def _write(out: Path, name: str, text: str) -> str:
    (out / name).write_text(text)
    return name


def _gen_triangle(args, text, out):
    (M,) = _need(detect.parse_bitmats(text), 1, "triangle")
    s = rid.triangle_to_distributivity(M.bits)
    files = [_write(out, "structure.magma", format_structure(s))]
    return files, {"identity": "a*(b+c)=(a*b)+(a*c)",
                   "witness_map": "failing (a,b,c) -> sorted vertices (a-2, b-2, c-2)"}


def _graph_from(text):
    if text.startswith("wgraph"):
        return detect.parse_wgraph(text)
    return rid.tripartite_to_graph(detect.parse_tripartite(text))


def _gen_zero_triangle(args, text, out):
    inst = rid.zero_triangle_to_constant_identity(_graph_from(text))
    files = [_write(out, "structure.magma", format_structure(inst.structure))]
    return files, {"identity": rid.ZERO_TRIANGLE_EXPR + " = _const",
                   "witness_map": "failing (a,b,c) -> vertices (a-2, b-2, c-2)"}


def _gen_counting(args, text, out):
    s = rid.zero_triangle_to_counting(_graph_from(text))
    files = [_write(out, "structure.magma", format_structure(s))]
    return files, {"witness_map": "count = |S|^3 - n^3 + ordered zero triples"}


def _gen_fourap(args, text, out, which):
    sets = _need(detect.parse_intsets(text), 4, which)
    gen = rpat.iter_fourap_to_square if which == "fourap-square" else rpat.iter_fourap_to_T
    files, deltas = [], []
    N = None
    for inst in gen(sets, args.delta_range):
        files.append(_write(out, f"delta_{inst.delta}.bitmat", detect.format_bitmats(inst.matrices)))
        deltas.append(inst.delta)
        N = inst.N
    step = ("N*(j-2i+k) + (delta-2j+i-2k)" if which == "fourap-square" else "N*(delta-i) + 2i+3k")
    return files, {"deltas": deltas, "N": N, "scale": 6 if which == "fourap-square" else 3,
                   "witness_map": f"pattern (i,j,k) -> 4-AP of scaled values with step {step}"}


def _gen_pattern_identity(args, text, out, which):
    ms = _need(detect.parse_bitmats(text), 4, which)
    family = args.family or ("f1" if which == "square-identity" else "f5")
    fn = rid.square_to_identity if which == "square-identity" else rid.t_to_identity
    inst = fn(*ms, family=family)
    files = [_write(out, "structure.magma", format_structure(inst.structure))]
    return files, {"family": family, "identity": rid.FAMILY_EXPRESSIONS[family] + " = _const",
                   "witness_map": f"element e -> value e-{rid.SQUARE_C}n-1; values (x_a,x_b,x_c) -> "
                                  f"pattern per family {family}"}


def _gen_multi_to_mono(args, text, out):
    ms = _need(detect.parse_bitmats(text), 4, "multi-to-mono")
    files, tuples = [], []
    for ell, big in rpat.iter_multi_to_mono_square(ms):
        files.append(_write(out, "mono_" + "_".join(map(str, ell)) + ".bitmat", detect.format_bitmats([big])))
        tuples.append(list(ell))
    return files, {"tuples": tuples, "witness_map": "mono square (i,j,k') -> multichromatic (i,j,k'-2n)"}


def _gen_colorize(args, text, out):
    A = detect.parse_intsets(text)[0]
    files = []
    for t, inst in enumerate(rpat.colorize_kap(A, args.k, args.trials, _seed(args))):
        files.append(_write(out, f"trial_{t}.intset", detect.format_intsets(inst)))
    return files, {"k": args.k, "trials": args.trials, "witness_map": "identity"}


def _gen_monochromatize(args, text, out):
    sets = detect.parse_intsets(text)
    files, tuples = [], []
    for ell, B in rpat.iter_monochromatize_kap(sets):
        files.append(_write(out, "mono_" + "_".join(map(str, ell)) + ".intset", detect.format_intsets([B])))
        tuples.append(list(ell))
    n = max(s.N for s in sets)
    return files, {"tuples": tuples, "witness_map": f"(b, d) -> (b, d - {10 * max(n, 1)})"}


def _gen_hyperclique(args, text, out):
    sets = detect.parse_intsets(text)
    h = rpat.ap_to_hyperclique(sets, args.digit_bound)
    files = [_write(out, "hypergraph.hypergraph", detect.format_hypergraph(h))]
    return files, {"k": len(sets), "part_size": len(h.parts[0]),
                   "witness_map": "clique x -> a = Mx with M_ij = (i-j)/(k-1)"}


def _gen_foursum(args, text, out):
    sets = _need(detect.parse_intsets(text), 4, "foursum")
    lists = rpat.fourap_to_foursum(sets)
    n = max(max(s.N for s in sets), 1)
    files = [_write(out, "foursum.intlist", detect.format_intlists(lists))]
    return files, {"witness_map": f"(b1,..,b4) -> a1 = b1/(1+{20 * n}), a2 = -b2/(2+{30 * n})"}


def _gen_embedding(args, text, out):
    s = load_structure(args.input)
    if not args.expression:
        raise UsageError("subexpression-embedding needs --expression")
    f = expr.parse_expression(args.expression, tuple(s.ops))
    emb, _ = rid.subexpression_embedding(s, f)
    files = [_write(out, "structure.magma", format_structure(emb))]
    T = len(expr.subexpressions(f))
    return files, {"expression": args.expression, "subexpressions": T,
                   "witness_map": f"element 1 + x*{T} + t -> (x, subexpression t); 0 is inf"}


def _gen_behrend(args, text, out):
    n = int(text.strip()) if args.n is None else args.n
    classes = behrend_partition(n, args.q)
    files = [_write(out, "behrend.intset", detect.format_intsets([detect.IntSet(n, c) for c in classes]))]
    return files, {"n": n, "q": args.q, "classes": len(classes), "witness_map": "none"}


def _gen_squarefree(args, text, out):
    n = int(text.strip()) if args.n is None else args.n
    ms = rpat.squarefree_matrices(n)
    files = [_write(out, f"squarefree_{i}.bitmat", detect.format_bitmats([m])) for i, m in enumerate(ms)]
    return files, {"n": n, "matrices": len(ms), "witness_map": "none"}


GENERATORS = {
    "triangle": _gen_triangle,
    "zero-triangle": _gen_zero_triangle,
    "zero-triangle-count": _gen_counting,
    "fourap-square": lambda a, t, o: _gen_fourap(a, t, o, "fourap-square"),
    "fourap-T": lambda a, t, o: _gen_fourap(a, t, o, "fourap-T"),
    "square-identity": lambda a, t, o: _gen_pattern_identity(a, t, o, "square-identity"),
    "T-identity": lambda a, t, o: _gen_pattern_identity(a, t, o, "T-identity"),
    "multi-to-mono": _gen_multi_to_mono,
    "colorize": _gen_colorize,
    "monochromatize": _gen_monochromatize,
    "hyperclique": _gen_hyperclique,
    "foursum": _gen_foursum,
    "subexpression-embedding": _gen_embedding,
    "behrend": _gen_behrend,
    "squarefree": _gen_squarefree,
}


def cmd_generate(args) -> int:
    if args.family and args.reduction not in ("square-identity", "T-identity"):
        raise UsageError("--family only applies to square-identity and T-identity")
    if args.reduction == "square-identity" and args.family and args.family not in rid.SQUARE_FAMILIES:
        raise UsageError(f"square families are {', '.join(rid.SQUARE_FAMILIES)}")
    if args.reduction == "T-identity" and args.family and args.family not in rid.T_FAMILIES:
        raise UsageError(f"T families are {', '.join(rid.T_FAMILIES)}")
    text = detect.read_text(args.input) if args.input != "-" else ""
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files, info = GENERATORS[args.reduction](args, text, out)
    manifest = {
        "reduction": args.reduction,
        "input": str(args.input),
        "parameters": {"family": args.family, "delta_range": args.delta_range, "seed": _seed(args)},
        "files": files,
        **info,
    }
    (out / "manifest.json").write_text(json.dumps(_plain(manifest), sort_keys=True, indent=2) + "\n")
    report = RunReport("generate", {"reduction": args.reduction, "input": str(args.input)},
                       wall_time_ms=(time.perf_counter() - t0) * 1000, seed=_seed(args),
                       details={"files": len(files), "output": str(out)})
    _emit(args, report, f"wrote {len(files)} file(s) to {out}")
    return EXIT_OK


# --- bench ------------------------------------------------------------------


ASSOC = "(a+b)+c=a+(b+c)"
DIST = "a*(b+c)=(a*b)+(a*c)"


def bench_case(suite: str, n: int, seed: int = 0):
    """Run one benchmark case; returns (seconds, verdict)."""
    cfg = verify.FieldConfig(seed=seed)
    if suite == "quadratic":
        s, ident = make_zn(n), expr.parse_identity(ASSOC)
        t0 = time.perf_counter()
        v = verify.verify_identity(s, ident, cfg)
    elif suite == "matrix":
        s, ident = make_zn(n, True), expr.parse_identity(DIST)
        t0 = time.perf_counter()
        v = verify.verify_identity(s, ident, cfg)
    elif suite == "cubic":
        s, ident = make_zn(n), expr.parse_identity(ASSOC)
        t0 = time.perf_counter()
        v = verify.brute_force_verify(s, ident)
    elif suite == "freivalds":
        s = make_zn(n, True)
        t0 = time.perf_counter()
        v = verify.freivalds_distributivity(s, cfg)
    else:
        raise UsageError(f"unknown suite {suite!r}")
    return time.perf_counter() - t0, v


def loglog_slope(sizes, times) -> float:
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.maximum(np.asarray(times, dtype=float), 1e-9))
    return float(np.polyfit(x, y, 1)[0])


def run_bench(suite: str, sizes, seed: int = 0, repeat: int = 1) -> dict:
    rows = []
    for n in sizes:
        best, v = math.inf, None
        for _ in range(repeat):
            dt, v = bench_case(suite, n, seed)
            best = min(best, dt)
        rows.append({"n": n, "seconds": best, "outcome": v.outcome, "engine": v.engine})
    slope = loglog_slope([r["n"] for r in rows], [r["seconds"] for r in rows]) if len(rows) > 1 else None
    return {"suite": suite, "rows": rows, "slope": slope}


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",") if x]
    if sizes != sorted(sizes) or not sizes:
        raise UsageError("--sizes must be a non-empty ascending list")
    seed = _seed(args)
    t0 = time.perf_counter()
    res = run_bench(args.suite, sizes, seed, args.repeat)
    report = RunReport("bench", {"suite": args.suite, "sizes": sizes}, seed=seed,
                       wall_time_ms=(time.perf_counter() - t0) * 1000, details=res)
    lines = [f"suite={args.suite}", f"{'n':>6}  {'seconds':>10}  outcome"]
    lines += [f"{r['n']:>6}  {r['seconds']:>10.4f}  {r['outcome']}" for r in res["rows"]]
    if res["slope"] is not None:
        lines.append(f"log-log slope: {res['slope']:.3f}")
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magmacheck", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--json", action="store_true", help="print a JSON run report")
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="random seed (default: $MAGMA_SEED or 0)")

    sp = sub.add_parser("verify", help="check an identity on a structure (0 holds, 1 fails)")
    sp.add_argument("structure")
    sp.add_argument("--identity", required=True, help='e.g. "(a+b)+c=a+(b+c)" or "f=_const"')
    sp.add_argument("--engine", choices=("auto", "brute", "pit", "freivalds"), default="auto")
    sp.add_argument("--trials", type=int, default=2)
    sp.add_argument("--prime", type=int, default=verify.modp.MERSENNE61)
    sp.add_argument("--ops", help="comma-separated operation symbols (default: the structure's)")
    sp.add_argument("--witness", action="store_true", help="after a randomized Fails, search for a witness")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("classify", help="print the regime of an identity")
    sp.add_argument("--identity", required=True)
    sp.add_argument("--ops", help="comma-separated operation symbols (default: +,*,o1..o4)")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_classify)

    for name, fn, hlp in (("check-field", cmd_check_field, "field axioms (0 accept, 1 reject)"),
                          ("check-ring", cmd_check_ring, "ring axioms (0 accept, 1 reject)")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("structure")
        sp.add_argument("--add", default="+")
        sp.add_argument("--mul", default="*")
        if name == "check-ring":
            sp.add_argument("--require-unital", action="store_true")
        common(sp, seed=name == "check-ring")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("detect", help="run a brute-force detector (0 none, 1 found)")
    sp.add_argument("kind", choices=DETECTORS)
    sp.add_argument("instance")
    sp.add_argument("--k", type=int, default=4, help="progression length for kap")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("generate", help="build a reduction instance plus manifest.json")
    sp.add_argument("reduction", choices=sorted(GENERATORS))
    sp.add_argument("input", help="input file ('-' for generators driven by --n)")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--family", choices=rid.SQUARE_FAMILIES + rid.T_FAMILIES)
    sp.add_argument("--delta-range", type=int, default=rpat.DELTA_C, help="window constant c")
    sp.add_argument("--digit-bound", type=int, default=None, help="ruler digit bound c (default: formula image)")
    sp.add_argument("--expression", help="expression for subexpression-embedding")
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--trials", type=int, default=64)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=int, default=16)
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("count", help="count distributive triples")
    sp.add_argument("structure")
    sp.add_argument("--add", default="+")
    sp.add_argument("--mul", default="*")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("bench", help="time a suite over sizes and fit a log-log slope")
    sp.add_argument("suite", choices=("quadratic", "matrix", "cubic", "freivalds"))
    sp.add_argument("--sizes", default="256,512,1024,2048")
    sp.add_argument("--repeat", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, MagmaError, ValueError, KeyError, OSError) as e:
        print(f"magmacheck: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
