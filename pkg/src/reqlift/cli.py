"""Command-line workbench: compile, check, score, perturb, serve."""

from __future__ import annotations

import json
import os
import sys
import threading

import click

from . import corpus as corpus_mod
from .buchi import (BitEncoding, Holds, format_lasso, is_empty,
                    ltl_to_buchi, model_check)
from .frontend import parse_dependencies, preprocess
from .gr1 import Realizable, add_assumption, build_gr1, check_realizability
from .ltl import Formula, conj, parse_formula, to_text
from .metrics import fmeasure
from .pipeline import CompileResult, compile_corpus
from .session import SessionServer


@click.group()
def main():
    """Stylized-requirements workbench: NL to LTL, models and synthesis."""


def _load(corpus_path, config_path):
    docs = corpus_mod.load_corpus(corpus_path)
    glossary, partition = corpus_mod.load_config(config_path)
    return docs, glossary, partition


def _report_warnings(result: CompileResult):
    for w in result.warnings:
        click.echo(f"warning: {w}", err=True)
    for e in result.errors:
        click.echo(f"error: {e}", err=True)


@main.command("compile")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default="reqlift-out", show_default=True)
@click.option("--dump-types", is_flag=True, help="also write the symbol table JSON")
@click.option("--dump-deps", is_flag=True,
              help="print typed-dependency triples for every sentence")
def cmd_compile(corpus_path, config_path, out_dir, dump_types, dump_deps):
    """Compile a corpus into formulas and a transition-system model."""
    docs, glossary, partition = _load(corpus_path, config_path)
    if dump_deps:
        for doc in docs:
            click.echo(f"# {doc.source_tag}: {doc.text}")
            for dep in parse_dependencies(preprocess(doc.text, glossary)):
                click.echo(str(dep))
    result = compile_corpus(docs, glossary, partition)
    _report_warnings(result)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "formulas.ltl"), "w", encoding="utf-8") as fh:
        fh.write(result.formulas_text())
    with open(os.path.join(out_dir, "model.sal"), "w", encoding="utf-8") as fh:
        fh.write(result.model_text)
    if dump_types:
        with open(os.path.join(out_dir, "symbols.json"), "w", encoding="utf-8") as fh:
            fh.write(result.symbols.to_json())
    click.echo(f"{len(result.formulas)} formulas, "
               f"{len(result.model.definitions)} definitions, "
               f"{len(result.model.initializations)} initializations, "
               f"{len(result.model.transitions)} transitions -> {out_dir}")
    if not result.ok:
        sys.exit(1)


@main.command("check")
@click.argument("mode", type=click.Choice(["consistency", "theorem", "realizability"]))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--theorem", "theorem_text", default=None,
              help="LTL formula for theorem mode")
@click.option("--assume", "assumptions", multiple=True,
              help="environment assumption (LTL), repeatable")
@click.option("--dot", "dot_path", default=None, type=click.Path(),
              help="write the checked automaton or machine as Graphviz DOT")
@click.option("--out", "out_dir", default="reqlift-out", show_default=True)
@click.option("--bit-cap", default=24, show_default=True)
def cmd_check(mode, corpus_path, config_path, theorem_text, assumptions,
              dot_path, out_dir, bit_cap):
    """Consistency, theorem or realizability check of a compiled corpus."""
    docs, glossary, partition = _load(corpus_path, config_path)
    result = compile_corpus(docs, glossary, partition)
    _report_warnings(result)
    if not result.ok:
        sys.exit(1)
    declared = set(result.symbols.category)

    if mode == "consistency":
        encoding = BitEncoding(result.symbols)
        props = [encoding.encode(cf.formula) for cf in result.formulas]
        body = conj(props + encoding.global_constraints())
        automaton = ltl_to_buchi(body)
        if dot_path:
            with open(dot_path, "w", encoding="utf-8") as fh:
                fh.write(automaton.to_dot())
        witness = is_empty(automaton)
        if witness is None:
            click.echo("inconsistent: the conjoined requirements admit no behaviour")
            sys.exit(2)
        click.echo("consistent: a witness behaviour exists")
        click.echo(format_lasso(witness, encoding))
        return

    if mode == "theorem":
        if not theorem_text:
            raise click.UsageError("theorem mode requires --theorem")
        theorem = parse_formula(theorem_text, declared)
        outcome = model_check(result.model, theorem)
        if isinstance(outcome, Holds):
            click.echo(f"holds: {to_text(theorem)}")
            return
        click.echo(f"counterexample for: {to_text(theorem)}")
        encoding = BitEncoding(result.symbols)
        encoding.encode(theorem)
        click.echo(format_lasso(outcome.lasso, encoding))
        sys.exit(2)

    spec = build_gr1([(cf.formula, cf.doc.source_tag) for cf in result.formulas],
                     result.symbols)
    for text in assumptions:
        spec = add_assumption(spec, parse_formula(text, declared))
    verdict = check_realizability(spec, bit_cap=bit_cap)
    if isinstance(verdict, Realizable):
        os.makedirs(out_dir, exist_ok=True)
        machine_path = os.path.join(out_dir, "moore_machine.json")
        with open(machine_path, "w", encoding="utf-8") as fh:
            json.dump(verdict.machine.to_json(), fh, indent=2, sort_keys=True)
        if dot_path:
            with open(dot_path, "w", encoding="utf-8") as fh:
                fh.write(verdict.machine.to_dot())
        click.echo(f"realizable: machine with {len(verdict.machine.output_fn)} "
                   f"states -> {machine_path}")
        return
    cs = verdict.counterstrategy
    move = {k: v for k, v in cs.initial_move.items()}
    click.echo("unrealizable: counterstrategy available")
    click.echo("first environment move: "
               + ", ".join(f"{k}={v}" for k, v in sorted(move.items())))
    sys.exit(2)


@main.command("score")
@click.option("--ground", "ground_path", required=True, type=click.Path(exists=True))
@click.option("--generated", "generated_path", required=True,
              type=click.Path(exists=True))
def cmd_score(ground_path, generated_path):
    """Subformula F-measure between two formula files (JSON report)."""
    ground = _read_formulas(ground_path)
    generated = _read_formulas(generated_path)
    if len(ground) != len(generated):
        raise click.UsageError(
            f"{len(ground)} ground formulas vs {len(generated)} generated")
    reports = []
    for (gid, g), (_aid, a) in zip(ground, generated):
        report = fmeasure(g, a)
        entry = report.to_json()
        entry["id"] = gid
        reports.append(entry)
    mean = lambda key: sum(r[key] for r in reports) / len(reports)  # noqa: E731
    click.echo(json.dumps({
        "formulas": reports,
        "precision": mean("precision"),
        "recall": mean("recall"),
        "f_measure": mean("f_measure"),
    }, indent=2))


def _read_formulas(path) -> list[tuple[int, Formula]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "|" in line:
                parts = [p.strip() for p in line.split("|")]
                ident = int(parts[0]) if parts[0].isdigit() else i
                line = parts[-1]
            else:
                ident = i
            out.append((ident, parse_formula(line)))
    return out


@main.command("perturb")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="glossary phrases to protect from rewriting")
@click.option("--rule", "rule_name", required=True,
              type=click.Choice([r.value for r in corpus_mod.PerturbationRule]))
def cmd_perturb(corpus_path, config_path, rule_name):
    """Rewrite the corpus with one perturbation rule (stdout)."""
    docs = corpus_mod.load_corpus(corpus_path)
    glossary = None
    if config_path:
        glossary, _ = corpus_mod.load_config(config_path)
    rule = corpus_mod.PerturbationRule(rule_name)
    for doc in docs:
        rewritten = corpus_mod.perturb(doc, rule, glossary)
        flag = "  # unaffected" if rewritten.unaffected else ""
        click.echo(f"{rewritten.source_tag} | {rewritten.text}{flag}")


@main.command("serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=4715, show_default=True)
@click.option("--ws-port", default=None, type=int,
              help="WebSocket bridge port (default: port+1)")
@click.option("--stdio", is_flag=True, help="speak the protocol on stdio instead")
@click.option("--assume", "assumptions", multiple=True)
@click.option("--out", "out_dir", default="reqlift-out", show_default=True)
def cmd_serve(corpus_path, config_path, port, ws_port, stdio, assumptions, out_dir):
    """Serve the counterstrategy game and assumption review."""
    docs, glossary, partition = _load(corpus_path, config_path)
    result = compile_corpus(docs, glossary, partition)
    if not result.ok:
        _report_warnings(result)
        sys.exit(1)
    declared = set(result.symbols.category)
    spec = build_gr1([(cf.formula, cf.doc.source_tag) for cf in result.formulas],
                     result.symbols)
    for text in assumptions:
        spec = add_assumption(spec, parse_formula(text, declared))
    verdict = check_realizability(spec)
    if isinstance(verdict, Realizable):
        click.echo("specification is realizable; nothing to debug", err=True)
        sys.exit(1)
    os.makedirs(out_dir, exist_ok=True)
    requirements = [{"id": cf.doc.id, "source": cf.doc.source_tag,
                     "text": cf.doc.text} for cf in result.formulas]
    server = SessionServer(spec, verdict.counterstrategy, requirements, out_dir)
    if stdio:
        server.run_stdio()
        return
    ws = ws_port if ws_port is not None else port + 1
    threading.Thread(target=server.serve_ws, args=(ws,), daemon=True).start()
    click.echo(f"serving JSON lines on 127.0.0.1:{port}, WebSocket on {ws}",
               err=True)
    server.serve_tcp(port)


if __name__ == "__main__":
    main()
