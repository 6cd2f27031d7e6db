"""Command-line front end: synth, check, katdiff, compose and the corpus runner.

Exit codes: 0 success, 2 for a negative answer ("No solutions.", a failed
check or a counterexample), 1 for usage, parse and runtime errors.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import click

from . import algebra, automata, synth
from .automata import EQUIVALENCE, INCLUSION
from .editdist import DEFAULT_SCORES, ScoreConfig
from .kat import HypothesisSet, KatSyntaxError, SymbolTable, parse_hypotheses, parse_kat, show, symbols_of
from .lang import BenchmarkFile, LangSyntaxError, parse_file
from .translate import build_abstraction

SYNTH_SCHEMA = "katrefine/synth/1"

OK, ERROR, NEGATIVE = 0, 1, 2


class Failure(click.ClickException):
    """An error reported on stderr with exit code 1."""

    exit_code = ERROR


# ------------------------------------------------------------- configuration


def _scores(text: Optional[str]) -> ScoreConfig:
    if not text:
        return DEFAULT_SCORES
    if os.path.exists(text):
        lines = Path(text).read_text(encoding="utf-8").splitlines()
        text = ",".join(l.split("#", 1)[0].strip() for l in lines)
    try:
        return ScoreConfig.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        raise Failure(f"bad --scores: {e}")


def _names(text: Optional[str]) -> frozenset:
    return frozenset(x.strip() for x in (text or "").split(",") if x.strip())


@dataclass
class Job:
    """Everything needed to run one benchmark; picklable for the corpus pool."""

    path: str
    direction: Optional[str] = None
    max_depth: Optional[int] = None
    max_solutions: Optional[int] = None
    max_nodes: Optional[int] = None
    protect: Optional[str] = None
    scores: Optional[str] = None
    share: Optional[bool] = None
    timeout: Optional[float] = None

    def load(self) -> BenchmarkFile:
        try:
            return parse_file(self.path)
        except OSError as e:
            raise Failure(f"cannot read {self.path}: {e.strerror}")
        except LangSyntaxError as e:
            raise Failure(f"{self.path}:{e.line}:{e.column}: {e}")

    def config(self, bf: BenchmarkFile) -> synth.SynthConfig:
        """Flags override the file's front matter, which overrides defaults."""
        fm = bf.config
        direction = self.direction or fm.get("direction", INCLUSION)
        if direction not in (INCLUSION, EQUIVALENCE):
            raise Failure(f"direction must be le or eq, not {direction!r}")
        protect = _names(self.protect) if self.protect is not None else _names(fm.get("protect"))
        share = self.share if self.share is not None else fm.get("share-symbols", "on") != "off"
        kw = {}
        for name in ("max_depth", "max_solutions", "max_nodes"):
            v = getattr(self, name)
            if v is None and name.replace("_", "-") in fm:
                v = int(fm[name.replace("_", "-")])
            if v is not None:
                kw[name] = v
        return synth.SynthConfig(
            direction=direction,
            protect=protect,
            share=share,
            scores=_scores(self.scores or fm.get("scores")),
            timeout=self.timeout,
            **kw,
        )


def _run(job: Job) -> tuple[BenchmarkFile, synth.SynthResult]:
    bf = job.load()
    return bf, synth.synth(bf.left, bf.right, job.config(bf))


# ------------------------------------------------------------- rendering


def _hyp_count(s: synth.Solution) -> int:
    seen = set()
    for leaf in s.leaves:
        seen.update(leaf.hyps)
    return len(seen)


def summary(res: synth.SynthResult) -> dict:
    sols = res.solutions
    if not sols:
        return {"solutions": 0, "complete": 0}
    tuples = [len(s.leaves) for s in sols]
    hyps = [_hyp_count(s) for s in sols]
    return {
        "solutions": len(sols),
        "complete": sum(s.complete for s in sols),
        "tuples": [min(tuples), max(tuples)],
        "hypotheses": [min(hyps), max(hyps)],
    }


def summary_line(res: synth.SynthResult) -> str:
    s = summary(res)
    if not s["solutions"]:
        return "No solutions."
    return (
        f"{s['solutions']} solutions ({s['complete']} complete); "
        f"tuples {s['tuples'][0]}-{s['tuples'][1]}; hypotheses {s['hypotheses'][0]}-{s['hypotheses'][1]}"
    )


def _plural(n: int, word: str) -> str:
    if n == 1:
        return f"1 {word}"
    return f"{n} " + ("hypotheses" if word == "hypothesis" else word + "s")


def _symbol_lines(res: synth.SynthResult) -> list[str]:
    alpha = res.alpha
    used = symbols_of(res.k_left) | symbols_of(res.k_right)
    out = ["Symbols:"]
    for s in alpha.table.tests:
        if s in used:
            out.append(f"  {s.display:<4} {alpha.origins.get(s, '')}")
    acts = [s.display for s in alpha.table.actions if s in used]
    out.append("  events: " + ", ".join(acts))
    return out


def _tree_lines(t: synth.Tree, res: synth.SynthResult, indent: str, counter: list, exprs: bool) -> list[str]:
    if isinstance(t, synth.Branch):
        out = []
        for case, child in t.children:
            out.append(f"{indent}case {case}")
            out += _tree_lines(child, res, indent + "  ", counter, exprs)
        if not t.covered:
            out.append(f"{indent}(cases do not partition the traces: split inside a loop)")
        return out
    if isinstance(t, synth.Unsolved):
        return [f"{indent}unsolved: {t.reason}"]
    counter[0] += 1
    out = [f"{indent}tuple {counter[0]}: {t.hyps}"]
    if exprs:
        out.append(f"{indent}  {res.left.name}: {show(t.left)}")
        out.append(f"{indent}  {res.right.name}: {show(t.right)}")
    return out


def render(res: synth.SynthResult, top: Optional[int] = None, exprs: bool = False) -> str:
    """Text report: header, symbols, solution trees, summary line."""
    rel = "≡" if res.direction == EQUIVALENCE else "≤"
    lines = [f"{res.left.name} {rel} {res.right.name}"]
    lines += _symbol_lines(res)
    lines.append(f"  {res.left.name}: {show(res.k_left)}")
    lines.append(f"  {res.right.name}: {show(res.k_right)}")
    shown = res.solutions if top is None else res.solutions[:top]
    for i, s in enumerate(shown, 1):
        kind = "complete" if s.complete else "partial"
        lines.append("")
        lines.append(f"Solution {i}: {kind}, {_plural(len(s.leaves), 'tuple')}, {_plural(_hyp_count(s), 'hypothesis')}")
        lines += _tree_lines(s.tree, res, "  ", [0], exprs)
    if top is not None and len(res.solutions) > top:
        lines.append("")
        lines.append(f"({len(res.solutions) - top} more solutions not shown)")
    lines.append("")
    lines.append(summary_line(res))
    return "\n".join(lines) + "\n"


def _tree_json(t: synth.Tree) -> dict:
    if isinstance(t, synth.Branch):
        return {
            "split": str(t.split),
            "side": t.side,
            "covered": t.covered,
            "cases": [{"assume": str(a), "tree": _tree_json(c)} for a, c in t.children],
        }
    if isinstance(t, synth.Unsolved):
        return {"unsolved": t.reason}
    return {
        "left": show(t.left),
        "right": show(t.right),
        "hypotheses": [algebra.hyp_to_json(h) for h in t.hyps],
        "assumptions": [str(a) for a in t.left_asms + t.right_asms],
    }


def to_json(res: synth.SynthResult, top: Optional[int] = None) -> dict:
    """Structured report; every solution carries a relation that verifies."""
    alpha = res.alpha
    sols = []
    for s in res.solutions if top is None else res.solutions[:top]:
        rel = synth.completed_relation(s, res.k_left, res.k_right, res.direction)
        sols.append(
            {
                "complete": s.complete,
                "tuples": len(s.leaves),
                "hypotheses": _hyp_count(s),
                "tree": _tree_json(s.tree),
                # partial trees get the trivial tuple so the relation covers
                "relation": algebra.to_json(rel, origins=alpha.origins),
            }
        )
    return {
        "schema": SYNTH_SCHEMA,
        "direction": res.direction,
        "left": {"name": res.left.name, "expr": show(res.k_left)},
        "right": {"name": res.right.name, "expr": show(res.k_right)},
        "symbols": algebra.symbols_to_json(alpha.table.symbols, alpha.origins),
        "solutions": sols,
        "summary": summary(res),
    }


# ------------------------------------------------------------- commands


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Synthesize and check trace-refinement relations between two program fragments."""


def _synth_options(f):
    opts = [
        click.option("--direction", type=click.Choice([INCLUSION, EQUIVALENCE]), help="le: left ≤ right; eq: ≡."),
        click.option("--max-depth", type=int, help="Recursion depth bound (default 8)."),
        click.option("--max-solutions", type=int, help="Number of trees kept (default 256)."),
        click.option("--max-nodes", type=int, help="Search node budget (default 4000)."),
        click.option("--protect", help="Comma-separated events that may not be hypothesized away."),
        click.option("--scores", help="Edit scores: a file or 'remove=1,replace=1,match=-1/4,penalty=8'."),
        click.option("--share-symbols", type=click.Choice(["on", "off"]), help="Share test/event symbols across programs."),
        click.option("--timeout", type=float, help="Wall-clock cap in seconds (makes output timing dependent)."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _job(path, direction, max_depth, max_solutions, max_nodes, protect, scores, share_symbols, timeout) -> Job:
    return Job(
        str(path),
        direction,
        max_depth,
        max_solutions,
        max_nodes,
        protect,
        scores,
        None if share_symbols is None else share_symbols == "on",
        timeout,
    )


@main.command("synth")
@click.argument("file", type=click.Path(dir_okay=False))
@_synth_options
@click.option("--json", "as_json", is_flag=True, help="Emit the structured report instead of text.")
@click.option("--top", type=int, help="Only print the first N solutions.")
@click.option("--exprs", is_flag=True, help="Print each tuple's restricted expressions.")
def cmd_synth(file, as_json, top, exprs, **flags):
    """Synthesize relations between the two fragments of FILE."""
    _, res = _run(_job(file, **flags))
    if as_json:
        click.echo(json.dumps(to_json(res, top), indent=2, ensure_ascii=False))
    else:
        click.echo(render(res, top, exprs), nl=False)
    sys.exit(OK if res.solutions else NEGATIVE)


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise Failure(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise Failure(f"{path}: not JSON ({e})")


def _relations(doc: dict, which: Optional[int]) -> list[tuple[str, dict]]:
    if doc.get("schema") == algebra.SCHEMA:
        return [("relation", doc)]
    if doc.get("schema") != SYNTH_SCHEMA:
        raise Failure(f"unknown document schema {doc.get('schema')!r}")
    sols = doc["solutions"]
    if which is not None:
        if not 1 <= which <= len(sols):
            raise Failure(f"--solution must be between 1 and {len(sols)}")
        return [(f"solution {which}", sols[which - 1]["relation"])]
    return [(f"solution {i}", s["relation"]) for i, s in enumerate(sols, 1)]


@main.command("check")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("relation", type=click.Path(dir_okay=False))
@click.option("--solution", type=int, help="Check only this solution of a synth report.")
@click.option("--share-symbols", type=click.Choice(["on", "off"]))
def cmd_check(file, relation, solution, share_symbols):
    """Verify a relation (or every solution of a synth --json report) against FILE."""
    job = Job(str(file), share=None if share_symbols is None else share_symbols == "on")
    bf = job.load()
    cfg = job.config(bf)
    c1, c2 = (bf.left, bf.right) if bf.left.name == "C1" else (bf.right, bf.left)
    alpha = build_abstraction(c1, c2, share=cfg.share)
    # the same expressions synth starts from
    k1, k2 = synth._Search(bf.left, bf.right, alpha, cfg).exprs_of(synth._Node(frozenset(), frozenset(), HypothesisSet()))
    bad = 0
    for label, doc in _relations(_read_json(relation), solution):
        try:
            rel, _ = algebra.from_json(doc, alpha.table)
        except (KeyError, ValueError, KatSyntaxError) as e:
            raise Failure(f"{label}: cannot read relation: {e}")
        v = synth.verify_solution(rel, k1, k2)
        if v:
            click.echo(f"{label}: Ok ({len(rel)} tuples)")
        else:
            bad += 1
            click.echo(f"{label}: {v}")
    sys.exit(NEGATIVE if bad else OK)


@main.command("katdiff")
@click.argument("expr1")
@click.argument("expr2")
@click.option("--hyps", default="", help="Hypotheses such as 'A=1, b=0, A=B'.")
@click.option("--direction", type=click.Choice([INCLUSION, EQUIVALENCE]), default=INCLUSION)
def cmd_katdiff(expr1, expr2, hyps, direction):
    """Compare two KAT expressions (lower-case tests, upper-case actions)."""
    t = SymbolTable()
    try:
        k1, k2 = parse_kat(expr1, t), parse_kat(expr2, t)
        A = parse_hypotheses(hyps, t)
    except (KatSyntaxError, ValueError) as e:
        raise Failure(str(e))
    res = automata.check(k1, k2, A, direction)
    if res:
        click.echo("Ok")
        sys.exit(OK)
    if res.left_not_right is not None:
        click.echo(f"in k1, not in k2: {res.left_not_right}")
    if res.right_not_left is not None:
        click.echo(f"in k2, not in k1: {res.right_not_left}")
    sys.exit(NEGATIVE)


COMPOSE_OPS = {
    "seq": (2, algebra.compose_seq),
    "sum": (2, algebra.compose_sum),
    "union": (2, algebra.union),
    "trans": (2, algebra.compose_trans),
    "star": (1, algebra.compose_star),
    "star-merged": (1, algebra.compose_star_merged),
    "context": (1, None),
}


@main.command("compose")
@click.argument("op", type=click.Choice(list(COMPOSE_OPS)))
@click.argument("relations", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--before", default="1", help="Left context for 'context' (KAT expression).")
@click.option("--after", default="1", help="Right context for 'context' (KAT expression).")
def cmd_compose(op, relations, before, after):
    """Combine relation documents; symbols are matched by name."""
    arity, fn = COMPOSE_OPS[op]
    if len(relations) != arity:
        raise Failure(f"{op} takes {arity} relation(s), got {len(relations)}")
    table = SymbolTable()
    rels = []
    for path in relations:
        (_, doc), *rest = _relations(_read_json(path), None)
        if rest:
            raise Failure(f"{path} holds several solutions; extract one relation first")
        rels.append(algebra.from_json(doc, table)[0])
    try:
        if op == "context":
            out = algebra.embed_context(rels[0], parse_kat(before, table), parse_kat(after, table))
        else:
            out = fn(*rels)
    except (algebra.MixedDirections, KatSyntaxError, ValueError) as e:
        raise Failure(str(e))
    if isinstance(out, algebra.Undefined):
        click.echo(f"Undefined: no partner for tuple {out.tuple}", err=True)
        sys.exit(NEGATIVE)
    click.echo(json.dumps(algebra.to_json(out), indent=2, ensure_ascii=False))


# ------------------------------------------------------------- corpus


@dataclass
class Row:
    name: str
    seconds: float
    summary: dict
    verified: bool
    text: str
    error: str = ""


def run_entry(job: Job, top: Optional[int]) -> Row:
    name = Path(job.path).stem
    start = time.perf_counter()
    try:
        _, res = _run(job)
    except click.ClickException as e:
        return Row(name, 0.0, {}, False, "", e.message)
    seconds = time.perf_counter() - start
    verified = all(
        (rel := synth.completed_relation(s, res.k_left, res.k_right, res.direction)) is not None
        and bool(synth.verify_solution(rel, res.k_left, res.k_right))
        for s in res.solutions
    )
    return Row(name, seconds, summary(res), verified, render(res, top))


def _golden_status(row: Row, golden: Optional[Path], update: bool) -> str:
    if golden is None or row.error:
        return ""
    path = golden / f"{row.name}.txt"
    if update:
        path.write_text(row.text, encoding="utf-8")
        return "written"
    if not path.exists():
        return "missing"
    return "same" if path.read_text(encoding="utf-8") == row.text else "DIFFERS"


@main.command("corpus")
@click.argument("directory", type=click.Path(file_okay=False, exists=True))
@click.option("--golden", type=click.Path(file_okay=False), help="Directory of expected text outputs.")
@click.option("--update", is_flag=True, help="Rewrite the golden files instead of comparing.")
@click.option("--top", type=int, default=10, show_default=True, help="Solutions printed per golden file.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Benchmarks run in parallel.")
def cmd_corpus(directory, golden, update, top, jobs):
    """Run every *.c benchmark in DIRECTORY; verify all solutions and compare goldens."""
    paths = sorted(Path(directory).glob("*.c"))
    if not paths:
        raise Failure(f"no benchmarks in {directory}")
    gdir = Path(golden) if golden else None
    if gdir is not None and update:
        gdir.mkdir(parents=True, exist_ok=True)
    jobs_ = [Job(str(p)) for p in paths]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(run_entry, jobs_, [top] * len(jobs_)))
    else:
        rows = [run_entry(j, top) for j in jobs_]
    click.echo(f"{'benchmark':<22} {'time':>7} {'sols':>5} {'cmpl':>5} {'tuples':>7} {'hypos':>6}  verified  golden")
    failed = 0
    for row in rows:
        if row.error:
            failed += 1
            click.echo(f"{row.name:<22} error: {row.error}")
            continue
        s = row.summary
        tup = f"{s['tuples'][0]}-{s['tuples'][1]}" if s["solutions"] else "-"
        hyp = f"{s['hypotheses'][0]}-{s['hypotheses'][1]}" if s["solutions"] else "-"
        status = _golden_status(row, gdir, update)
        ok = row.verified and status not in ("DIFFERS", "missing")
        failed += not ok
        click.echo(
            f"{row.name:<22} {row.seconds:>6.2f}s {s['solutions']:>5} {s['complete']:>5} {tup:>7} {hyp:>6}"
            f"  {'yes' if row.verified else 'NO':<8}  {status}"
        )
    click.echo(f"{len(rows)} benchmarks, {failed} failing")
    sys.exit(NEGATIVE if failed else OK)


if __name__ == "__main__":
    main()
