"""``detent`` command-line driver.

Exit codes: 0 ok, 2 usage error, 3 numerical guard violation, 4 I/O or
file-format error.  Stochastic commands require ``--seed``.  Floats are
printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import bsstats, entropy, experiments, sampling
from .conditioning import ConditionPair, condition_pair
from .errors import DetentError, FormatError, UsageError
from .graph import format_graph, generate_family, read_graph
from .kernel_io import read_kernel, write_kernel
from .kernels import dilate, restrict, spectral_summary, transfer_current, validate_kernel

EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _jsonable(x.item())
    return x


def dumps(obj) -> str:
    """JSON with floats at 17 significant digits; infinities become strings."""
    obj = _jsonable(obj)

    def enc(x):
        if isinstance(x, bool) or x is None:
            return json.dumps(x)
        if isinstance(x, float):
            if math.isnan(x):
                return '"nan"'
            if math.isinf(x):
                return '"inf"' if x > 0 else '"-inf"'
            return format(x, ".17g")
        if isinstance(x, (int, str)):
            return json.dumps(x)
        if isinstance(x, list):
            return "[" + ", ".join(enc(v) for v in x) + "]"
        if isinstance(x, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {enc(v)}" for k, v in x.items()) + "}"
        raise TypeError(f"cannot serialise {type(x).__name__}")

    return enc(obj)


def _emit(args, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise FormatError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict, started: float | None = None):
    if started is not None and getattr(args, "timing", False):
        payload["elapsed_ms"] = (time.perf_counter() - started) * 1e3
    _emit(args, dumps(payload))


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _family_graph(args):
    fam = args.family
    if fam in ("cycle", "path", "complete"):
        return generate_family(fam, args.n)
    if fam == "torus2d":
        return generate_family(fam, args.n, args.m)
    if fam == "doubled_star":
        return generate_family(fam, args.n if args.n else 3)
    if fam == "hypercube":
        return generate_family(fam, args.n)
    if fam == "random_regular":
        if args.seed is None:
            raise UsageError("random_regular needs --seed")
        return generate_family(fam, args.n, args.d, seed=args.seed)
    raise UsageError(f"unknown family {fam!r}")


def _graph(args):
    if getattr(args, "graph", None):
        return read_graph(args.graph)
    if getattr(args, "family", None):
        return _family_graph(args)
    raise UsageError("give --graph FILE or --family NAME")


def _kernel(args, attr="kernel"):
    k = read_kernel(getattr(args, attr))
    labels = getattr(args, "labels", None)
    if labels:
        k = restrict(k, _ints(labels))
    return k


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"'{args.command}' is stochastic and requires --seed")
    return args.seed


def _radius(text):
    if text is None or str(text).lower() in ("inf", "infinity"):
        return None
    try:
        r = int(text)
    except ValueError:
        raise UsageError(f"--radius must be an integer or 'inf', got {text!r}") from None
    if r < 0:
        raise UsageError("--radius must be non-negative")
    return r


def _roots(text):
    if text is None or text == "all":
        return "all"
    if text.startswith("n="):
        return int(text[2:])
    return _ints(text)


# commands


def cmd_gen(args):
    _emit(args, format_graph(_family_graph(args)))


def cmd_transfer_current(args):
    k = transfer_current(_graph(args))
    write_kernel(args.out, k, args.encoding)


def cmd_dilate(args):
    write_kernel(args.out, dilate(_kernel(args)), args.encoding)


def cmd_restrict(args):
    if not args.labels:
        raise UsageError("restrict needs --labels")
    write_kernel(args.out, restrict(read_kernel(args.kernel), _ints(args.labels)), args.encoding)


def cmd_validate(args):
    k = _kernel(args)
    s = spectral_summary(k)
    _emit_json(args, {
        "class": k.kind,
        "size": k.size,
        "n_labels": k.ground.n_labels,
        "n_vertices": k.ground.vertex_count,
        "rank": k.rank(),
        "min_eigenvalue": float(s.eigenvalues[0]) if k.size else 0.0,
        "max_eigenvalue": float(s.eigenvalues[-1]) if k.size else 0.0,
        "normalized_trace": s.normalized_trace,
    })


def cmd_sample(args):
    k = _kernel(args)
    seed = _need_seed(args)
    lines, trace = [], ["draw,element,conditional_probability"]
    for d in range(args.n):
        draw = sampling.sample_dpp(k, seed, draw=d, trace=bool(args.trace))
        lines.append(" ".join(str(i) for i in draw.elements))
        if args.trace:
            trace += [f"{d},{e},{format(p, '.17g')}" for e, p in draw.trace]
    _emit(args, "\n".join(lines))
    if args.trace:
        try:
            with open(args.trace, "w") as fh:
                fh.write("\n".join(trace) + "\n")
        except OSError as exc:
            raise FormatError(f"cannot write {args.trace}: {exc}") from None


def cmd_inclusion_prob(args):
    k = _kernel(args)
    F = _ints(args.elements or "")
    _emit_json(args, {"elements": F, "probability": sampling.inclusion_probability(k, F)})


def cmd_pmf(args):
    pmf = sampling.enumerate_pmf(_kernel(args))
    rows = ["subset,probability"]
    rows += [" ".join(map(str, s)) + "," + format(p, ".17g") for s, p in pmf.support]
    _emit(args, "\n".join(rows))


def cmd_condition(args):
    k = _kernel(args)
    cp = ConditionPair(_ints(args.include or ""), _ints(args.exclude or ""))
    write_kernel(args.out, condition_pair(k, cp), args.encoding)


def cmd_entropy(args):
    t0 = time.perf_counter()
    k = _kernel(args)
    m = args.method
    if m == "exact":
        est = entropy.exact_entropy(k)
    elif m == "chain":
        order = entropy.LabelOrder(_ints(args.order)) if args.order else None
        est = entropy.chain_entropy_exact(k, order)
    elif m == "mc":
        est = entropy.mc_entropy(k, args.n, _need_seed(args))
    elif m == "hbar":
        if args.element is None:
            raise UsageError("entropy hbar needs --element")
        est = entropy.hbar_percolation(k, args.element, args.n, _need_seed(args))
    elif m == "local":
        est = entropy.hbar_graph_sum(k, _roots(args.roots), _radius(args.radius), args.n, _need_seed(args))
    else:
        raise UsageError(f"unknown entropy method {m!r}")
    payload = est.as_dict()
    payload.setdefault("seed", args.seed)
    _emit_json(args, payload, t0)


def cmd_lyons(args):
    t0 = time.perf_counter()
    g = _graph(args)
    roots = _roots(args.roots)
    if isinstance(roots, int):
        _need_seed(args)
    est = entropy.lyons_formula(g, roots, args.kmax, seed=args.seed or 0)
    payload = est.as_dict()
    payload["seed"] = args.seed
    _emit_json(args, payload, t0)


def cmd_tree_count(args):
    g = _graph(args)
    logz = entropy.matrix_tree_logZ(g)
    payload = {"log_tau": logz, "per_vertex": logz / g.vertex_count}
    if not g.is_weighted and logz < 700:
        payload["tau"] = round(math.exp(logz))
    _emit_json(args, payload)


def cmd_tightness(args):
    k = _kernel(args)
    g = read_graph(args.graph) if args.graph else None
    prof = bsstats.tightness_profile(k, g)
    payload = {"mass": prof.as_dict(), "total": prof.total}
    if args.radius is not None:
        payload["tail_beyond_radius"] = prof.tail(int(args.radius))
    _emit_json(args, payload)


def cmd_ball_distance(args):
    r = _radius(args.radius)
    if r is None:
        raise UsageError("ball-distance needs a finite --radius")
    a = bsstats.decorated_ball(read_kernel(args.kernel), args.root, r)
    b = bsstats.decorated_ball(read_kernel(args.kernel_b or args.kernel), args.root_b, r)
    res = bsstats.ball_distance(a, b)
    _emit_json(args, {"isomorphic": res.isomorphic, "max_deviation": res.max_deviation,
                      "mapping": list(res.mapping) if res.mapping else None})


def cmd_bs_report(args):
    seed = _need_seed(args)
    r = _radius(args.radius)
    if r is None:
        raise UsageError("bs-report needs a finite --radius")
    items = []
    for path in args.kernels:
        k = read_kernel(path)
        items.append((k.ground.base_graph, k))
    rep = bsstats.sequence_report(items, r, args.n, seed, match_tol=args.tol)
    _emit_json(args, rep)


def cmd_experiment(args):
    if args.name == "convergence":
        seed = _need_seed(args)
        if not args.family or not args.sizes:
            raise UsageError("experiment convergence needs --family and --sizes")
        cfg = experiments.ConvergenceConfig(
            family=args.family,
            sizes=tuple(_ints(args.sizes)),
            methods=tuple(args.methods.split(",")) if args.methods else experiments.METHODS,
            seed=seed,
            radius=_radius(args.radius) if args.radius is not None else 4,
            n_roots=args.roots_n,
            n_samples=args.n,
            k_max=args.kmax,
        )
        _emit(args, experiments.rows_to_csv(experiments.convergence_rows(cfg)))
    elif args.name == "tightness-counterexample":
        _emit_json(args, experiments.tightness_counterexample())
    else:
        raise UsageError(f"unknown experiment {args.name!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="detent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, *, kernel=False, graph=False, seed=False, out=True, help=None):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        if kernel:
            sp.add_argument("--kernel", required=True, help="kernel file (.dk)")
            sp.add_argument("--labels", help="restrict to these labels first, e.g. 0,1")
        if graph:
            sp.add_argument("--graph", help="graph file")
            sp.add_argument("--family", choices=sorted(experiments_families()))
            sp.add_argument("--n", type=int, default=0, help="family size")
            sp.add_argument("--m", type=int, help="second torus side")
            sp.add_argument("--d", type=int, help="degree for random_regular")
        if seed:
            sp.add_argument("--seed", type=int)
        if out:
            sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--timing", action="store_true", help="add elapsed_ms to JSON output")
        return sp

    add("gen", cmd_gen, graph=True, seed=True, help="write a family graph")
    sp = add("transfer-current", cmd_transfer_current, graph=True, seed=True, out=False)
    sp.add_argument("--out", required=True)
    sp.add_argument("--encoding", choices=("csv", "binary"))
    for name, func in (("dilate", cmd_dilate), ("restrict", cmd_restrict)):
        sp = add(name, func, kernel=True, out=False)
        sp.add_argument("--out", required=True)
        sp.add_argument("--encoding", choices=("csv", "binary"))
    add("validate", cmd_validate, kernel=True)
    sp = add("sample", cmd_sample, kernel=True, seed=True)
    sp.add_argument("--n", type=int, default=1, help="number of draws")
    sp.add_argument("--trace", help="write conditional probabilities as CSV")
    sp = add("inclusion-prob", cmd_inclusion_prob, kernel=True)
    sp.add_argument("--elements", help="comma-separated element ids")
    add("pmf", cmd_pmf, kernel=True)
    sp = add("condition", cmd_condition, kernel=True, out=False)
    sp.add_argument("--include", help="elements conditioned in")
    sp.add_argument("--exclude", help="elements conditioned out")
    sp.add_argument("--out", required=True)
    sp.add_argument("--encoding", choices=("csv", "binary"))
    sp = add("entropy", cmd_entropy, kernel=True, seed=True)
    sp.add_argument("method", choices=("exact", "chain", "mc", "hbar", "local"))
    sp.add_argument("--n", type=int, default=1000, help="replicates")
    sp.add_argument("--element", type=int)
    sp.add_argument("--order", help="visiting order for 'chain'")
    sp.add_argument("--radius", help="integer or 'inf'")
    sp.add_argument("--roots", help="'all', 'n=<count>' or comma-separated vertices")
    sp = add("lyons", cmd_lyons, graph=True, seed=True)
    sp.add_argument("--kmax", type=int, default=entropy.DEFAULT_KMAX)
    sp.add_argument("--roots", help="'all', 'n=<count>' or comma-separated vertices")
    add("tree-count", cmd_tree_count, graph=True, seed=True)
    sp = add("tightness", cmd_tightness, kernel=True)
    sp.add_argument("--graph", help="override the kernel's base graph")
    sp.add_argument("--radius", type=int, help="also report tail mass beyond this radius")
    sp = add("ball-distance", cmd_ball_distance)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--kernel-b")
    sp.add_argument("--root", type=int, default=0)
    sp.add_argument("--root-b", type=int, default=0)
    sp.add_argument("--radius", required=True)
    sp = add("bs-report", cmd_bs_report, seed=True)
    sp.add_argument("--kernels", nargs="+", required=True)
    sp.add_argument("--radius", required=True)
    sp.add_argument("--n", type=int, default=50, help="roots per item")
    sp.add_argument("--tol", type=float, default=bsstats.DEFAULT_MATCH_TOL)
    sp = add("experiment", cmd_experiment, seed=True)
    sp.add_argument("name", choices=("convergence", "tightness-counterexample"))
    sp.add_argument("--family", choices=experiments.CONVERGENCE_FAMILIES)
    sp.add_argument("--sizes", help="comma-separated ascending sizes")
    sp.add_argument("--methods", help="subset of " + ",".join(experiments.METHODS))
    sp.add_argument("--radius", help="hbar radius (default 4)")
    sp.add_argument("--n", type=int, default=20, help="replicates per root")
    sp.add_argument("--roots-n", type=int, default=20, help="roots per size")
    sp.add_argument("--kmax", type=int, default=entropy.DEFAULT_KMAX)
    return p


def experiments_families():
    from .graph import FAMILIES

    return FAMILIES.keys()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DetentError as exc:
        print(f"detent: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"detent: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
