"""Command-line entry point: ``contextlab <command> ...``.

Exit codes: 0 success, 1 a verification failed, 2 bad usage or malformed input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (ClassicalStrategy, GameSpec, bound_report, build_bell_expression, build_game,
                   evaluate_bell, losing_questions, quantum_loss_mass, search_classical,
                   simulate_game, term_probabilities)
from .graph import (OrthoGraph, build_orthogonality_graph, chromatic_number, is_square_free,
                    ks_colorable)
from .linalg import RaySet, format_rays, parse_rays
from .quantum import (check_unitary_invariance, random_unitary, reduced_single_party,
                      supersinglet)
from .represent import RepProblem, appendix_subgraph, numeric_represent, refute_appendix_subgraph
from .sqfree import MAX_N, find_subgraph, run_enumeration

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SCHEMA_PATH = Path(__file__).with_name("schemas") / "report.schema.json"


class UsageError(Exception):
    pass


def task_seed(seed: int, label: str) -> list[int]:
    """Seed material for the generator of one named task."""
    return [seed, zlib.crc32(label.encode())]


@dataclass
class RunManifest:
    argv: list
    seed: int
    threads: int
    inputs: dict = field(default_factory=dict)      # path -> sha256
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def add_input(self, path: str) -> bytes:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data

    def to_json(self) -> dict:
        return {"argv": self.argv, "seed": self.seed, "threads": self.threads,
                "versions": {"contextlab": __version__, "python": platform.python_version(),
                             "numpy": np.__version__},
                "inputs": self.inputs, "outputs": self.outputs,
                "wall_time_s": round(self.wall_time_s, 3)}


class Run:
    """Per-invocation context: output mode, manifest, collected lines."""

    def __init__(self, args, argv):
        self.args = args
        self.manifest = RunManifest(list(argv), args.seed, resolve_threads(args.threads))
        self.lines: list[str] = []

    def say(self, text: str = "") -> None:
        self.lines.append(text)

    def read_text(self, path: str) -> str:
        return self.manifest.add_input(path).decode()

    def write(self, path: str, text: str) -> None:
        Path(path).write_text(text)
        self.manifest.outputs.append(path)


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("CONTEXTLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"CONTEXTLAB_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


# --- input helpers ---------------------------------------------------------------

def load_rays(run: Run, path: str) -> RaySet:
    try:
        return parse_rays(run.read_text(path))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_graph(run: Run, args) -> OrthoGraph:
    if getattr(args, "rays", None):
        return build_orthogonality_graph(load_rays(run, args.rays))
    g6 = getattr(args, "graph6", None)
    if g6:
        text = run.read_text(g6).strip().splitlines()[0] if Path(g6).is_file() else g6
        try:
            return OrthoGraph.from_graph6(text.strip())
        except ValueError as exc:
            raise UsageError(f"bad graph6 {text!r}: {exc}") from None
    raise UsageError("give --rays FILE or --graph6 STRING|FILE")


def load_spec(run: Run, path: str) -> GameSpec:
    try:
        return GameSpec.from_json(json.loads(run.read_text(path)))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a game spec ({exc})") from None


def load_strategy(run: Run, path: str, spec: GameSpec) -> ClassicalStrategy:
    """JSON {"answers": [[ray string per basis] per party]}."""
    try:
        data = json.loads(run.read_text(path))
        index = {str(r): i for i, r in enumerate(spec.rays)}
        s = ClassicalStrategy([[index[a] for a in row] for row in data["answers"]])
        s.validate(spec)
        return s
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a strategy for this game ({exc})") from None


def strategy_json(spec: GameSpec, s: ClassicalStrategy) -> dict:
    return {"answers": [[str(spec.rays[a]) for a in row] for row in s.answers]}


# --- commands ----------------------------------------------------------------------

def cmd_graph_build(run: Run, args) -> tuple[dict, bool]:
    g = load_graph(run, args)
    g6 = g.to_graph6()
    if args.out:
        run.write(args.out, g6 + "\n")
    run.say(f"vertices: {g.n}")
    run.say(f"edges: {g.num_edges}")
    run.say(f"square-free: {str(is_square_free(g)).lower()}")
    run.say(f"graph6: {g6}")
    return {"n": g.n, "edges": g.edges(), "graph6": g6, "square_free": is_square_free(g)}, True


def cmd_graph_chromatic(run: Run, args) -> tuple[dict, bool]:
    g = load_graph(run, args)
    t0 = time.perf_counter()
    cert = chromatic_number(g)
    ok = cert.verify(g)
    run.say(f"chi={cert.chi}")
    run.say(f"coloring: {' '.join(map(str, cert.coloring.colors))}")
    run.say(f"clique: {' '.join(map(str, cert.clique))}")
    run.say(f"lower bound proof: {'exhaustive search for ' + str(cert.chi - 1) + ' colors' if cert.exhaustive else 'clique'}")
    run.say(f"certificate verified: {str(ok).lower()}")
    out = cert.to_json()
    out["seconds"] = round(time.perf_counter() - t0, 4)
    return out, ok


def cmd_graph_ks(run: Run, args) -> tuple[dict, bool]:
    g = load_graph(run, args)
    d = args.d or (g.rays.dim if g.rays is not None else None)
    if d is None:
        raise UsageError("--d is required for graph6 input")
    a = ks_colorable(g, d)
    if a is None:
        run.say("no KS assignment: the set is a KS set")
        return {"colorable": False}, True
    ok = a.verify(g)
    run.say(f"green: {' '.join(map(str, sorted(a.green)))}")
    run.say(f"verified: {str(ok).lower()}")
    return {"colorable": True, "green": sorted(a.green), "verified": ok}, ok


def _check_max_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise UsageError(f"--max-n must be in 1..{MAX_N}")


def cmd_enumerate(run: Run, args) -> tuple[dict, bool]:
    _check_max_n(args.max_n)
    stream = None
    sink = None
    if not args.count_only:
        if args.out:
            stream = open(args.out, "w")
            run.manifest.outputs.append(args.out)
            sink = lambda g: stream.write(g.to_graph6() + "\n")  # noqa: E731
        elif not args.json and not args.quiet:
            sink = lambda g: print(g.to_graph6())  # noqa: E731
    try:
        summary = run_enumeration(args.max_n, sink=sink)
    finally:
        if stream:
            stream.close()
    for n, c in summary.counted.items():
        run.say(f"n={n} count={c}")
    run.say(f"total={sum(summary.counted.values())} time={summary.wall_time_s:.2f}s")
    return summary.to_json(), True


def cmd_candidates(run: Run, args) -> tuple[dict, bool]:
    _check_max_n(args.max_n)
    summary = run_enumeration(args.max_n, d=args.d)
    for g6 in summary.candidates:
        run.say(g6)
    run.say(f"candidates with chi>{args.d}: {len(summary.candidates)}")
    return summary.to_json(), True


def cmd_represent(run: Run, args) -> tuple[dict, bool]:
    if args.graph == "appendix":
        g = appendix_subgraph()
    elif Path(args.graph).suffix == ".rays":
        g = build_orthogonality_graph(load_rays(run, args.graph))
    else:
        args.graph6, args.rays = args.graph, None
        g = load_graph(run, args)
    prob = RepProblem(g, args.dim)
    res = numeric_represent(prob, restarts=args.restarts, seed=args.seed)
    run.say(f"status: {res.status}")
    run.say(f"restarts used: {res.restarts_used}")
    run.say(f"residual: {res.residual:.3e}")
    out = {"status": res.status, "restarts_used": res.restarts_used, "residual": res.residual}
    if res.found:
        run.say(f"field: {res.field}  max edge overlap: {res.max_edge_overlap:.3e}")
        out.update(field=res.field, max_edge_overlap=res.max_edge_overlap,
                   rays=[str(r) for r in res.rays])
        if args.out:
            run.write(args.out, format_rays(res.rays))
    return out, True


def cmd_refute(run: Run, args) -> tuple[dict, bool]:
    t0 = time.perf_counter()
    rep = refute_appendix_subgraph()
    for c in rep.checks:
        run.say(f"[{'ok' if c['passed'] else 'FAIL'}] {c['check']}")
    run.say(f"identity: {rep.identity}")
    run.say(f"status: {rep.status}")
    out = rep.to_json()
    out["seconds"] = round(time.perf_counter() - t0, 4)
    return out, rep.passed


def cmd_supersinglet(run: Run, args) -> tuple[dict, bool]:
    try:
        s = supersinglet(args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = {"d": args.d, "amplitudes": s.dump().splitlines()}
    ok = True
    if not args.check_invariance:
        run.say(s.dump())
    else:
        rng = np.random.default_rng(task_seed(args.seed, "supersinglet"))
        dev = max(check_unitary_invariance(args.d, random_unitary(args.d, rng))
                  for _ in range(args.trials))
        red = float(np.abs(reduced_single_party(s) - np.eye(args.d) / args.d).max())
        ok = dev < 1e-10 and red < 1e-12
        run.say(f"max invariance deviation over {args.trials} unitaries: {dev:.3e}")
        run.say(f"reduced state deviation from I/d: {red:.3e}")
        run.say(f"passed: {str(ok).lower()}")
        out.update(max_deviation=dev, reduced_deviation=red, trials=args.trials, passed=ok)
    return out, ok


def cmd_game_build(run: Run, args) -> tuple[dict, bool]:
    rays = load_rays(run, args.rays)
    d = args.d or rays.dim
    try:
        spec = build_game(rays, d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = spec.to_json()
    if args.out:
        run.write(args.out, json.dumps(data, indent=1) + "\n")
    chi = chromatic_number(build_orthogonality_graph(rays)).chi
    run.say(f"bases: {len(spec.bases)}  rays in C: {spec.n_base}  completion rays: {len(spec.completion_rays)}")
    if chi <= d:
        run.say(f"warning: chi(G_C)={chi} <= d, a classical strategy can win")
    if spec.canonical_completion:
        run.say("completions are canonical-completion-dependent")
    return data, True


def cmd_game_simulate(run: Run, args) -> tuple[dict, bool]:
    spec = load_spec(run, args.spec)
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    if args.strategy == "quantum":
        strategy = "quantum"
    elif args.strategy == "search":
        strategy, _ = search_classical(spec, n_random=args.search_size,
                                       seed=task_seed(args.seed, "search"))
    else:
        strategy = load_strategy(run, args.strategy, spec)
    stats = simulate_game(spec, strategy, args.rounds, args.seed)
    out = {"strategy": args.strategy if strategy == "quantum" else strategy_json(spec, strategy),
           **stats.to_json()}
    run.say(f"rounds: {stats.rounds}  wins: {stats.wins}  losses: rule(i) {stats.losses['i']}, rule(ii) {stats.losses['ii']}")
    ok = True
    if strategy == "quantum":
        mass = quantum_loss_mass(spec)
        ok = stats.total_losses == 0 and mass < 1e-10
        run.say(f"largest losing probability mass over all questions: {mass:.3e}")
        out["max_loss_mass"] = mass
    else:
        lost = losing_questions(spec, strategy)
        run.say(f"losing questions (exhaustive): {len(lost)} of {len(spec.bases) ** spec.d}")
        out["losing_questions"] = len(lost)
    return out, ok


def cmd_bell_build(run: Run, args) -> tuple[dict, bool]:
    spec = load_spec(run, args.spec)
    expr = build_bell_expression(spec)
    run.say(f"terms: {expr.omega_qm} (raw {expr.raw_count})")
    for k, v in expr.counts.items():
        run.say(f"  {k}: {v}")
    if args.verbose:
        for t in expr.terms:
            run.say("  " + t.describe(spec))
    return expr.to_json(), True


def cmd_bell_eval(run: Run, args) -> tuple[dict, bool]:
    spec = load_spec(run, args.spec)
    expr = build_bell_expression(spec)
    if args.strategy == "quantum":
        probs = term_probabilities(expr, "quantum")
        value = float(sum(1 - p for p in probs))
        worst = max(probs, default=0.0)
        ok = worst < 1e-10 and abs(value - expr.omega_qm) < 1e-8
        run.say(f"quantum value: {value:.12f}  terms: {expr.omega_qm}  largest term probability: {worst:.3e}")
        return {"value": value, "omega_qm": expr.omega_qm, "max_term_probability": worst}, ok
    strategy = load_strategy(run, args.strategy, spec)
    value = evaluate_bell(expr, strategy)
    run.say(f"classical value: {value:g}  terms: {expr.omega_qm}")
    return {"value": value, "omega_qm": expr.omega_qm}, True


def cmd_bell_bounds(run: Run, args) -> tuple[dict, bool]:
    spec = load_spec(run, args.spec)
    expr = build_bell_expression(spec)
    rep = bound_report(expr, cap=args.cap)
    run.say(f"omega_qm: {rep.omega_qm}  qm value: {rep.qm_value:.10f}")
    run.say(f"lhv attains max: {str(rep.lhv_attains_max).lower()}")
    run.say(f"lhv bound: {rep.lhv_bound if rep.lhv_bound is not None else 'not computed'}"
            f"  upper: {rep.lhv_upper}  method: {rep.method}")
    for f in rep.flags:
        run.say(f"flag: {f}")
    ok = abs(rep.qm_value - rep.omega_qm) < 1e-8
    return rep.to_json(), ok


def cmd_verify_minimal(run: Run, args) -> tuple[dict, bool]:
    _check_max_n(args.max_n)
    summary = run_enumeration(args.max_n, d=3)
    cands = [OrthoGraph.from_graph6(s) for s in summary.candidates]
    target = appendix_subgraph()
    unique = len(cands) <= 1
    contains = all(find_subgraph(g, target) is not None for g in cands)
    refuted = refute_appendix_subgraph().passed
    ok = unique and contains and refuted
    tf = lambda b: str(b).lower()  # noqa: E731
    conclusion = (f"no SIC-capable set below {args.max_n + 1} vectors" if ok
                  else "not established")
    run.say(f"candidates: {len(cands)}; contains appendix subgraph: {tf(contains)}; "
            f"representation refuted: {tf(refuted)}; conclusion: {conclusion}")
    return {"max_n": args.max_n, "counts": summary.to_json()["counted"],
            "candidates": summary.candidates, "unique": unique, "contains_appendix": contains,
            "refuted": refuted, "conclusion": conclusion}, ok


# --- parser --------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default: $CONTEXTLAB_THREADS or CPU count)")
    return p


def _graph_input(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rays", help=".rays file")
    g.add_argument("--graph6", help="graph6 string or file")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="contextlab")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph").add_subparsers(dest="action", required=True)
    p = graph.add_parser("build", parents=[common])
    _graph_input(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph_build)
    p = graph.add_parser("chromatic", parents=[common])
    _graph_input(p)
    p.set_defaults(func=cmd_graph_chromatic)
    p = graph.add_parser("ks-color", parents=[common])
    _graph_input(p)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_graph_ks)

    p = sub.add_parser("enumerate", parents=[common])
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--out", help="write graph6 lines here")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("candidates", parents=[common])
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("represent", parents=[common])
    p.add_argument("--graph", required=True, help="'appendix', a .rays file, or graph6")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("refute-appendix", parents=[common])
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("supersinglet", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--check-invariance", action="store_true")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_supersinglet)

    game = sub.add_parser("game").add_subparsers(dest="action", required=True)
    p = game.add_parser("build", parents=[common])
    p.add_argument("--rays", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_game_build)
    p = game.add_parser("simulate", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--strategy", default="quantum", help="'quantum', 'search', or a strategy JSON file")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--search-size", type=int, default=1000)
    p.set_defaults(func=cmd_game_simulate)

    bell = sub.add_parser("bell").add_subparsers(dest="action", required=True)
    p = bell.add_parser("build", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--verbose", action="store_true", help="list every term")
    p.set_defaults(func=cmd_bell_build)
    p = bell.add_parser("eval", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--strategy", default="quantum")
    p.set_defaults(func=cmd_bell_eval)
    p = bell.add_parser("bounds", parents=[common])
    p.add_argument("--spec", required=True)
    p.add_argument("--cap", type=int, default=10 ** 8)
    p.set_defaults(func=cmd_bell_bounds)

    p = sub.add_parser("verify-theorem2", parents=[common])
    p.add_argument("--max-n", type=int, default=12)
    p.set_defaults(func=cmd_verify_minimal)
    return parser


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


def dispatch(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        run = Run(args, argv)
        result, ok = args.func(run, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run.manifest.wall_time_s = time.perf_counter() - t0
    command = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    if args.json:
        print(json.dumps({"command": command, "ok": bool(ok), "result": result,
                          "manifest": run.manifest.to_json()}, indent=1, default=_json_default))
    elif not args.quiet:
        for line in run.lines:
            print(line)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
