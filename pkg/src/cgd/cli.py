"""Command-line front end: trajectories, verification suites, decomposition.

Commands: run, verify, enumerate, decompose, check-blocks, export-dot.
All outputs are plain text; machine-readable summaries are key=value lines.
Exit codes: 0 success, 1 a requested assertion failed, 2 bad configuration
or unparsable input, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from .blocks import (
    BlockKit,
    MarkSpace,
    find_locality_radius,
    gate_footprint,
)
from .dot import export_dot
from .dynamics import Dynamics, DynamicsError, builtin_dynamics, get_dynamics
from .families import (
    TAPE_ALPHABETS,
    bare_tapes,
    shift_closure,
    single_head_tapes,
)
from .modulo import CanonicalGraph, canonicalize
from .patches import LocalRuleDynamics, parse_rule_file
from .portgraph import Alphabets, GraphError, GraphFormatError, parse_graph
from .reversibility import (
    GraphFamily,
    OutOfFamilyError,
    build_inverse,
    check_bijective_on_family,
    check_class_preservation,
    enumerate_family,
    serialize_inverse_table,
    vertex_preservation_exceptions,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_IO = 3

DEFAULT_EXCEPTION_BOUND = {"identity": 0, "moving-head": 0, "turtle": 2}


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


class _IOFailure(Exception):
    pass


def _load_graph(path: str) -> CanonicalGraph:
    return canonicalize(parse_graph(_read_text(path)))


def _load_dynamics(args) -> Dynamics:
    if getattr(args, "rule_file", None):
        table = parse_rule_file(_read_text(args.rule_file))
        return LocalRuleDynamics(table.as_rule())
    return get_dynamics(args.dynamics)


def _family_for(name: str, dynamics: Dynamics, max_vertices: int) -> GraphFamily:
    if name == "single-head-tape":
        members = single_head_tapes(max(1, max_vertices - 1))
        return GraphFamily.from_graphs(members, TAPE_ALPHABETS)
    if name == "tape-closure":
        members = bare_tapes(max_vertices) + single_head_tapes(
            max(1, max_vertices - 1))
        return GraphFamily.from_graphs(shift_closure(members), TAPE_ALPHABETS)
    if name == "all":
        if dynamics.alphabets is None:
            raise DynamicsError(
                f"{dynamics.name} accepts any alphabets; choose a named family")
        return enumerate_family(dynamics.alphabets, max_vertices)
    raise DynamicsError(f"unknown family {name!r} "
                        f"(known: all, single-head-tape, tape-closure)")


def _tape_kit(dynamics: Dynamics, max_vertices: int, exception_bound: int) -> BlockKit:
    if dynamics.name == "identity":
        return BlockKit(dynamics, dynamics, exception_bound,
                        MarkSpace.for_base(dynamics.alphabets or TAPE_ALPHABETS))
    if dynamics.name == "moving-head":
        members = bare_tapes(max_vertices) + single_head_tapes(
            max(1, max_vertices - 1))
        fam = GraphFamily.from_graphs(shift_closure(members), TAPE_ALPHABETS)
        return BlockKit.from_family(dynamics, fam, exception_bound)
    raise DynamicsError(
        f"block decomposition is wired for identity and moving-head, "
        f"not {dynamics.name!r}")


def _cmd_run(args) -> int:
    dynamics = _load_dynamics(args)
    X = _load_graph(args.input)
    out_dir = args.output_dir
    os.makedirs(out_dir, exist_ok=True)
    current = X
    for step in range(args.steps + 1):
        _write_text(os.path.join(out_dir, f"step{step:03d}.graph"),
                    current.to_text())
        if args.render:
            _write_text(os.path.join(out_dir, f"step{step:03d}.dot"),
                        export_dot(current))
        if step < args.steps:
            current = dynamics.apply(current)[0]
    print(f"dynamics={dynamics.name}")
    print(f"steps={args.steps}")
    print(f"output_dir={out_dir}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    dynamics = _load_dynamics(args)
    fam = _family_for(args.family, dynamics, args.max_vertices)
    lines = [f"dynamics={dynamics.name}", f"family={args.family}",
             f"members={len(fam)}"]
    failures = 0

    closed = True
    try:
        problem = check_bijective_on_family(dynamics, fam)
    except (OutOfFamilyError, DynamicsError) as exc:
        problem = str(exc)
        closed = False
    lines.append(f"bijective={'ok' if problem is None else problem}")
    failures += problem is not None
    if not closed:
        # The family is not even closed under the dynamics; the remaining
        # checks would only re-raise the same condition.
        lines.append("vertex_preserving=skipped")
        lines.append("exception_set=")
        lines.append("class_preservation=skipped")
        lines.append("inverse_composition=skipped")
        lines.append("result=fail")
        return _emit_verify(lines, args)

    exceptions = vertex_preservation_exceptions(dynamics, fam)
    lines.append(f"vertex_preserving={'ok' if not exceptions else 'exceptions'}")
    lines.append("exception_set=" + ";".join(
        f"{len(g.vertices)}v" for g in exceptions))
    if args.expect_exceptions is not None:
        expected = args.expect_exceptions
        if len(exceptions) != expected:
            lines.append(f"exception_count_expected={expected}")
            failures += 1

    class_problem = None
    for X in fam:
        class_problem = check_class_preservation(dynamics, X)
        if class_problem is not None:
            break
    lines.append(f"class_preservation={'ok' if class_problem is None else class_problem}")
    failures += class_problem is not None

    if failures == 0:
        inverse_problem = None
        table = build_inverse(dynamics, fam)
        for X in fam:
            Y = table.forward[X]
            if table.backward[Y] != X:
                inverse_problem = "backward table does not invert forward"
                break
        lines.append(
            f"inverse_composition={'ok' if inverse_problem is None else inverse_problem}")
        failures += inverse_problem is not None
        if args.output_dir and inverse_problem is None:
            _write_text(os.path.join(args.output_dir, "inverse-table.txt"),
                        serialize_inverse_table(table))
    else:
        lines.append("inverse_composition=skipped")

    lines.append(f"result={'pass' if failures == 0 else 'fail'}")
    return _emit_verify(lines, args)


def _emit_verify(lines, args) -> int:
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.output_dir:
        _write_text(os.path.join(args.output_dir, "verify-report.txt"), report)
    return EXIT_OK if report.endswith("result=pass\n") else EXIT_CHECK_FAILED


def _cmd_enumerate(args) -> int:
    alphabets = Alphabets.make(args.ports, args.vlabels, args.elabels)
    fam = enumerate_family(alphabets, args.max_vertices)
    chunks = [g.to_text() for g in fam]
    listing = f"# {len(fam)} graphs\n" + "\n".join(chunks)
    if args.output:
        _write_text(args.output, listing)
    else:
        sys.stdout.write(listing)
    print(f"members={len(fam)}")
    return EXIT_OK


def _cmd_decompose(args) -> int:
    dynamics = _load_dynamics(args)
    X = _load_graph(args.input)
    bound = (args.exception_bound if args.exception_bound is not None
             else DEFAULT_EXCEPTION_BOUND.get(dynamics.name, 0))
    kit = _tape_kit(dynamics, max(len(X.vertices), 2), bound)
    trace = [] if args.trace else None
    result = kit.decompose_step(X, trace=trace)
    direct = dynamics.apply(X)[0]
    agree = result == direct
    if args.trace:
        os.makedirs(args.output_dir, exist_ok=True)
        for i, stage in enumerate(trace):
            base = os.path.join(args.output_dir, f"stage{i:03d}")
            _write_text(base + ".graph", f"# {stage.label}\n" + stage.graph.to_text())
            if args.render:
                space = None if stage.label == "final" else kit.space
                _write_text(base + ".dot", export_dot(stage.graph, space))
        print(f"stages={len(trace)}")
        print(f"output_dir={args.output_dir}")
    print(f"dynamics={dynamics.name}")
    print(f"matches_direct_step={'yes' if agree else 'no'}")
    return EXIT_OK if agree else EXIT_CHECK_FAILED


def _cmd_check_blocks(args) -> int:
    dynamics = _load_dynamics(args)
    bound = (args.exception_bound if args.exception_bound is not None
             else DEFAULT_EXCEPTION_BOUND.get(dynamics.name, 0))
    kit = _tape_kit(dynamics, args.max_vertices, bound)
    tapes = single_head_tapes(max(1, args.max_vertices - 1))
    failures = 0
    for X in tapes:
        if kit.decompose_step(X) != dynamics.apply(X)[0]:
            failures += 1
            print(f"mismatch={X!r}")
    print(f"dynamics={dynamics.name}")
    print(f"members={len(tapes)}")
    print(f"block_identity={'ok' if failures == 0 else f'{failures} mismatches'}")

    lifted = GraphFamily.from_graphs(
        [kit.space.lift(g) for g in shift_closure(tapes)], kit.space.marked)
    radius = find_locality_radius(kit.conjugate, lifted, max_radius=4)
    print(f"locality_radius={radius if radius is not None else 'not found <= 4'}")
    if radius is None:
        failures += 1
    else:
        depth_bound = len(kit.space.marked.ports) ** radius
        worst = 0
        for X in tapes:
            lifted_x = kit.space.lift(X)
            touching = {v: 0 for v in lifted_x.vertices}
            for anchor in lifted_x.vertices:
                for v in gate_footprint(kit.conjugate, lifted_x, anchor):
                    touching[v] += 1
            worst = max(worst, max(touching.values(), default=0))
        print(f"observed_depth={worst}")
        print(f"depth_bound={depth_bound}")
        if worst > depth_bound:
            failures += 1
    print(f"result={'pass' if failures == 0 else 'fail'}")
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def _cmd_export_dot(args) -> int:
    X = _load_graph(args.input)
    space = None
    if args.marked:
        base_ports = []
        seen = set()
        for p in X.alphabets.ports:
            root = p[:-1]
            if root not in seen:
                seen.add(root)
                base_ports.append(root)
        base_labels = []
        seen = set()
        for l in X.alphabets.vertex_labels:
            root = l[:-1]
            if root not in seen:
                seen.add(root)
                base_labels.append(root)
        space = MarkSpace.for_base(
            Alphabets.make(base_ports, base_labels, X.alphabets.edge_labels))
        if space.marked != X.alphabets:
            raise GraphFormatError(
                "--marked expects alphabets produced by doubling a base")
    text = export_dot(X, space)
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgd",
        description="Causal graph dynamics: run, verify, decompose.")
    sub = parser.add_subparsers(dest="command", required=True)
    names = sorted(builtin_dynamics())

    def add_dynamics_args(p, rule_file=True):
        p.add_argument("--dynamics", choices=names, default="identity",
                       help="built-in dynamics name")
        if rule_file:
            p.add_argument("--rule-file",
                           help="local rule table file (overrides --dynamics)")

    p_run = sub.add_parser("run", help="write a trajectory as numbered graph files")
    add_dynamics_args(p_run)
    p_run.add_argument("--input", required=True)
    p_run.add_argument("--steps", type=int, default=1)
    p_run.add_argument("--output-dir", default="out")
    p_run.add_argument("--render", action="store_true", help="also write DOT files")

    p_verify = sub.add_parser("verify", help="bijectivity and inverse report over a family")
    add_dynamics_args(p_verify, rule_file=False)
    p_verify.add_argument("--max-vertices", type=int, required=True)
    p_verify.add_argument("--family", default="all",
                          choices=["all", "single-head-tape", "tape-closure"])
    p_verify.add_argument("--output-dir")
    p_verify.add_argument("--expect-exceptions", type=int, default=None,
                          help="fail unless exactly this many members are "
                               "non-vertex-preserving")

    p_enum = sub.add_parser("enumerate", help="list all canonical graphs up to a size")
    p_enum.add_argument("--max-vertices", type=int, required=True)
    p_enum.add_argument("--ports", nargs="+", default=["a", "b"])
    p_enum.add_argument("--vlabels", nargs="*", default=["0"])
    p_enum.add_argument("--elabels", nargs="*", default=[])
    p_enum.add_argument("--output")

    p_dec = sub.add_parser("decompose", help="run one step as a circuit of local gates")
    add_dynamics_args(p_dec, rule_file=False)
    p_dec.add_argument("--input", required=True)
    p_dec.add_argument("--trace", action="store_true",
                       help="write every intermediate marked graph")
    p_dec.add_argument("--output-dir", default="decompose-out")
    p_dec.add_argument("--render", action="store_true")
    p_dec.add_argument("--exception-bound", type=int, default=None)

    p_blocks = sub.add_parser("check-blocks",
                              help="block identity, locality radius and depth")
    add_dynamics_args(p_blocks, rule_file=False)
    p_blocks.add_argument("--max-vertices", type=int, required=True)
    p_blocks.add_argument("--exception-bound", type=int, default=None)

    p_dot = sub.add_parser("export-dot", help="render a graph file as DOT")
    p_dot.add_argument("--input", required=True)
    p_dot.add_argument("--output")
    p_dot.add_argument("--marked", action="store_true",
                       help="treat labels/ports as carrying mark bits")
    return parser


_COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "enumerate": _cmd_enumerate,
    "decompose": _cmd_decompose,
    "check-blocks": _cmd_check_blocks,
    "export-dot": _cmd_export_dot,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
