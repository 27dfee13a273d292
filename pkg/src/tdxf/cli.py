"""Command-line entry point: decompose, tables, automaton, emit-lp, solve, verify, cross-validate.

Exit status: 0 success, 2 usage error, 3 input error, 4 a check failed,
5 a size limit was hit.
"""

from __future__ import annotations

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .checks import (
    Instance,
    check_decomposition,
    check_lp,
    check_preservation,
    check_round_trips,
    check_sizes,
    check_traces,
    decode_term,
    run_all,
    unit_sense,
)
from .cores import Overflow, table_ceiling
from .decomposition import (
    DecompositionFormatError,
    InvalidDecomposition,
    parse_td,
    validate_nice,
    validate_raw,
    write_ntd,
)
from .formulation import LPFormatError, emit_jsonl, emit_lp, project_objective
from .graphs import GraphFormatError, OracleBudgetExceeded, ProblemSpec, parse_graph
from .simplex import Infeasible
from .verify import integral_to_trace, optimize

EXIT_USAGE, EXIT_INPUT, EXIT_CHECK, EXIT_OVERFLOW = 2, 3, 4, 5
DEFAULT_SEED = 20240917


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


class CheckFailed(click.ClickException):
    exit_code = EXIT_CHECK


class LimitHit(click.ClickException):
    exit_code = EXIT_OVERFLOW


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_instance(graph_path, problem, l, d, td_path, paper_literal) -> Instance:
    try:
        g = parse_graph(_read(graph_path))
    except GraphFormatError as exc:
        raise InputError(f"{graph_path}: {exc}") from None
    try:
        spec = ProblemSpec(problem, l, d)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    raw = None
    if td_path:
        try:
            raw = parse_td(_read(td_path), g)
        except DecompositionFormatError as exc:
            raise InputError(f"{td_path}: {exc}") from None
        problems = validate_raw(g, raw)
        if problems:
            raise InputError(f"{td_path}: {problems[0]}")
    return Instance(Path(graph_path).stem, g, spec, raw=raw, paper_literal=paper_literal)


def _emit(text: str, out: str | None, name: str):
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)
    click.echo(f"wrote {path / name}", err=True)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _guard(fn):
    """Map library errors onto exit codes."""
    import functools

    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Overflow as exc:
            raise LimitHit(str(exc)) from None
        except OracleBudgetExceeded as exc:
            raise LimitHit(f"oracle budget exceeded: {exc}") from None
        except (InvalidDecomposition, LPFormatError) as exc:
            raise InputError(str(exc)) from None

    return inner


def instance_options(fn):
    fn = click.option("--paper-literal", is_flag=True, help="Use the unmodified DS/HC rules.")(fn)
    fn = click.option("--td", "td_path", type=click.Path(), help="PACE .td decomposition to use.")(fn)
    fn = click.option("--d", "d", type=int, default=3, show_default=True, help="Colours for coloring.")(fn)
    fn = click.option("--l", "l", type=int, default=0, show_default=True, help="Threshold of IS/DS/Cut.")(fn)
    fn = click.option(
        "--problem", required=True, type=click.Choice(["is", "ds", "cut", "hc", "coloring"])
    )(fn)
    fn = click.argument("graph", type=click.Path())(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Table DP, tree automata and exact extended formulations on graphs of bounded treewidth."""


@main.command()
@click.argument("graph", type=click.Path())
@click.option("--td", "td_path", type=click.Path())
@click.option("--out", type=click.Path(), help="Directory for the .ntd file (default stdout).")
@_guard
def decompose(graph, td_path, out):
    """Build and validate the nice edge-introducing decomposition."""
    inst = load_instance(graph, "is", 0, 1, td_path, False)
    nd, g = inst.nd, inst.graph
    problems = validate_nice(g, nd)
    if problems:
        raise CheckFailed(f"decomposition invalid: {problems[0]}")
    click.echo(f"nodes={nd.size} width={nd.width}", err=True)
    _emit(write_ntd(nd, g), out, f"{inst.name}.ntd")


@main.command()
@instance_options
@_guard
def tables(graph, problem, l, d, td_path, paper_literal):
    """Run the table process and report table sizes."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    t = inst.tables
    report = {
        "instance": str(inst),
        "accepted": t.accepted,
        "finals": len(t.finals),
        "sizes": t.sizes,
        "max_table": t.max_table_size,
        "ceiling": table_ceiling(inst.spec, inst.nd.width, inst.graph),
        "width": inst.nd.width,
    }
    click.echo(_json(report), nl=False)


@main.command()
@instance_options
@click.option("--full", is_flag=True, help="List every state and transition.")
@click.option("--out", type=click.Path())
@_guard
def automaton(graph, problem, l, d, td_path, paper_literal, full, out):
    """Dump the tree-shaped automaton."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    _emit(inst.automaton.dump(full), out, f"{inst.name}.aut")


def _weights(path: str | None, inst: Instance):
    """Weights file: one ``<element> <weight>`` or ``<component> <element> <weight>`` per line."""
    if path is None:
        return inst.unit_objective
    w: dict = {}
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        tok = raw.split("#")[0].split()
        if not tok:
            continue
        try:
            if len(tok) == 2:
                w[int(tok[0])] = Fraction(tok[1])
            elif len(tok) == 3:
                w[(int(tok[0]), int(tok[1]))] = Fraction(tok[2])
            else:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{path}:{lineno}: bad weight line {raw!r}") from None
    try:
        return project_objective(inst.nd, inst.index, w, inst.core)
    except KeyError as exc:
        raise InputError(f"{path}: {exc.args[0]}") from None


@main.command("emit-lp")
@instance_options
@click.option("--weights", type=click.Path(), help="Element weights (default: all ones).")
@click.option("--sense", type=click.Choice(["max", "min"]), default=None)
@click.option("--format", "fmt", type=click.Choice(["lp", "jsonl"]), default="lp", show_default=True)
@click.option("--out", type=click.Path())
@_guard
def emit_lp_cmd(graph, problem, l, d, td_path, paper_literal, weights, sense, fmt, out):
    """Write the formulation as CPLEX LP text or JSON lines."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    if fmt == "jsonl":
        _emit(emit_jsonl(inst.system), out, f"{inst.name}.jsonl")
        return
    obj = _weights(weights, inst)
    _emit(emit_lp(inst.system, obj, sense or unit_sense(inst.spec)), out, f"{inst.name}.lp")


@main.command()
@instance_options
@click.option("--weights", type=click.Path())
@click.option("--sense", type=click.Choice(["max", "min"]), default=None)
@_guard
def solve(graph, problem, l, d, td_path, paper_literal, weights, sense):
    """Optimise over the formulation with exact simplex and decode the vertex."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    sense = sense or unit_sense(inst.spec)
    obj = _weights(weights, inst)
    try:
        res = optimize(inst.system, obj, sense)
    except Infeasible:
        click.echo("infeasible: no solution")
        return
    if not res.vertex.is_integral():
        raise CheckFailed("optimal vertex is not 0/1")
    term, _ = integral_to_trace(inst.automaton, inst.system, res.vertex)
    x = decode_term(inst, term)
    click.echo(f"optimum {res.value}")
    for i, comp in enumerate(x.components):
        click.echo(f"component {i}: {' '.join(str(e) for e in sorted(comp))}")


VERIFY_CHECKS = ("lp", "traces", "decomposition", "sizes", "preservation", "round_trips")


@main.command()
@instance_options
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--objectives", type=int, default=20, show_default=True)
@click.option("--check", "only", multiple=True, type=click.Choice(VERIFY_CHECKS))
@click.option("--out", type=click.Path())
@_guard
def verify(graph, problem, l, d, td_path, paper_literal, seed, samples, objectives, only, out):
    """Run the polytope checks on one instance and print a JSON report."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    rng = random.Random(seed)
    wanted = set(only or VERIFY_CHECKS)
    results = []
    if "lp" in wanted:
        results.append(check_lp(inst, rng, objectives))
    if "traces" in wanted:
        results.append(check_traces(inst, rng, samples))
    if "decomposition" in wanted:
        results.append(check_decomposition(inst, rng, samples))
    if "sizes" in wanted:
        results.append(check_sizes(inst))
    if "preservation" in wanted:
        results.append(check_preservation(inst))
    if "round_trips" in wanted:
        results.append(check_round_trips(inst, rng, samples))
    _finish(inst, seed, results, out)


@main.command("cross-validate")
@instance_options
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--objectives", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path())
@_guard
def cross_validate(graph, problem, l, d, td_path, paper_literal, seed, samples, objectives, out):
    """Run every acceptance check on one instance and write a JSON report."""
    inst = load_instance(graph, problem, l, d, td_path, paper_literal)
    _finish(inst, seed, run_all(inst, seed, objectives, samples), out)


def _finish(inst, seed, results, out):
    report = {
        "instance": str(inst),
        "seed": seed,
        "version": __version__,
        "checks": [r.to_json() for r in results],
        "status": "PASS" if all(r.ok for r in results) else "FAIL",
    }
    _emit(_json(report), out, f"{inst.name}.report.json")
    if report["status"] != "PASS":
        bad = next(r for r in results if not r.ok)
        raise CheckFailed(f"check {bad.name} failed ({bad.anchor})")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
