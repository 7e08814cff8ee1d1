"""ontocomply command line.

Exit status: 0 on success, 2 when inputs or options fail validation, 1 on
an unexpected internal error.  Every command computes its outputs in memory
and writes them to --out in one step, so a failed run leaves no files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .rdf import RDFSyntaxError, load, serialize

log = logging.getLogger("ontocomply")


class UsageError(Exception):
    """Bad input or option; maps to exit status 2."""


# ------------------------------------------------------------------ output

class Outputs:
    """Files staged in memory (or a scratch dir, for figures) until commit."""

    def __init__(self):
        self.texts: dict[str, str] = {}
        self.figures: dict[str, tuple] = {}

    def text(self, name: str, content: str) -> None:
        self.texts[name] = content

    def json(self, name: str, obj) -> None:
        self.texts[name] = json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def figure(self, name: str, fn, *args) -> None:
        self.figures[name] = (fn, args)

    def commit(self, out: Path) -> list[str]:
        out.mkdir(parents=True, exist_ok=True)
        scratch = Path(tempfile.mkdtemp(prefix=".ontocomply-", dir=out))
        try:
            for name, content in self.texts.items():
                (scratch / name).write_text(content, encoding="utf-8")
            for name, (fn, args) in self.figures.items():
                fn(*args, scratch / name)
            names = sorted(self.texts) + sorted(self.figures)
            for name in names:
                os.replace(scratch / name, out / name)
        finally:
            shutil.rmtree(scratch, ignore_errors=True)
        return names


# ------------------------------------------------------------------ options

def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _unit_float(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must be in [0, 1]")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _levels(s: str) -> list[int]:
    try:
        levels = sorted({int(x) for x in s.split(",") if x.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if not levels or levels[0] < 1:
        raise argparse.ArgumentTypeError("levels must be positive")
    return levels


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--format", choices=("json", "text"), default="text", help="stdout summary format")
    p.add_argument("--config", type=Path, help="JSON file whose keys override flags")
    p.add_argument("--seed", type=int, default=0)


def _add_matching(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-level", type=int, choices=(1, 2, 3, 4), default=4)
    p.add_argument("--heuristic-threshold", type=_unit_float, default=0.75)
    p.add_argument("--semantic-threshold", type=_unit_float, default=0.8)
    p.add_argument("--topological-threshold", type=_unit_float, default=0.5)
    p.add_argument("--vectors", type=Path, help="token vector file enabling level 3")


def _add_embedding(p: argparse.ArgumentParser, model: str) -> None:
    p.add_argument("--model", choices=("deepwalk", "node2vec", "struc2vec"), default=model)
    p.add_argument("--dim", type=_positive_int, default=64)
    p.add_argument("--walks", type=_positive_int, default=10)
    p.add_argument("--walk-length", type=_positive_int, default=20)
    p.add_argument("--window", type=_positive_int, default=5)
    p.add_argument("--negatives", type=_positive_int, default=5)
    p.add_argument("--epochs", type=_positive_int, default=5)
    p.add_argument("--lr", type=_positive_float, default=0.025)
    p.add_argument("--p", type=_positive_float, default=1.0)
    p.add_argument("--q", type=_positive_float, default=1.0)
    p.add_argument("--layers", type=_positive_int, default=3, help="struc2vec layers")
    p.add_argument("--workers", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontocomply", description="Ontology compliance for knowledge graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="match a KG against one ontology and reshape it")
    p.add_argument("kg", type=Path)
    p.add_argument("onto", type=Path)
    p.add_argument("--sweep", action="store_true", help="also report every level from 1 to --max-level")
    _add_matching(p)
    _add_common(p)

    p = sub.add_parser("align", help="compliance across two KG/ontology pairs")
    for name in ("kg1", "onto1", "kg2", "onto2"):
        p.add_argument(name, type=Path)
    p.add_argument("--eval", type=Path, help="ground-truth TSV; runs the bridged/unbridged top-k evaluation")
    p.add_argument("--seeds", type=_positive_int, default=20, help="number of evaluation seeds")
    p.add_argument("--top", type=_positive_int, default=5, help="candidates kept per unmatched term")
    _add_matching(p)
    _add_embedding(p, "struc2vec")
    _add_common(p)

    p = sub.add_parser("fragments", help="score and select ontology fragments")
    p.add_argument("kg", type=Path)
    p.add_argument("mappings", type=Path, nargs="+", help="mapping TSVs, each next to a same-stem .ttl")
    p.add_argument("--criteria", type=Path, help="criteria config JSON")
    p.add_argument("--levels", type=_levels, default=[1, 2, 3])
    p.add_argument("--seeds", type=_positive_int, default=10)
    _add_embedding(p, "deepwalk")
    _add_common(p)

    p = sub.add_parser("gen-fixture", help="generate a seeded mismatch KG and its answer key")
    p.add_argument("onto", type=Path)
    p.add_argument("--exact", type=int, default=6)
    p.add_argument("--typo", type=int, default=4)
    p.add_argument("--synonym", type=int, default=0)
    p.add_argument("--structural", type=int, default=2)
    p.add_argument("--synonyms", type=Path, help="token<TAB>synonym file for synonym plants")
    _add_matching(p)
    _add_common(p)

    p = sub.add_parser("embed", help="train node embeddings for one graph")
    p.add_argument("graph", type=Path)
    p.add_argument("--reify", action="store_true", help="turn predicates into nodes")
    p.add_argument("--dump-walks", action="store_true")
    _add_embedding(p, "deepwalk")
    _add_common(p)
    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config {args.config} must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("config", "out"):
            raise UsageError(f"config key {key!r} is not an option of '{args.command}'")
        action = actions[dest]
        try:
            if action.type is not None and value is not None and not isinstance(value, bool):
                value = action.type(",".join(map(str, value)) if isinstance(value, list) else str(value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {sorted(action.choices)}")
        setattr(args, dest, value)


def _effective(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("config", "out", "verbose", "format"):
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, list):
            v = [str(x) if isinstance(x, Path) else x for x in v]
        out[k] = v
    return out


def _load(path: Path, role: str):
    if not path.exists():
        raise UsageError(f"{path}: no such file")
    return load(path, role=role)


def _match_cfg(args):
    from .matching import MatchConfig, VectorFile

    provider = None
    if args.vectors is not None:
        if not args.vectors.exists():
            raise UsageError(f"{args.vectors}: no such file")
        provider = VectorFile.load(args.vectors)
    return MatchConfig(
        max_level=args.max_level,
        heuristic_threshold=args.heuristic_threshold,
        semantic_threshold=args.semantic_threshold,
        topological_threshold=args.topological_threshold,
        semantic_provider=provider,
    )


def _walk_cfg(args, reify: bool = False):
    from .embeddings import WalkConfig

    return WalkConfig(
        walks_per_node=args.walks, walk_length=args.walk_length, p=args.p, q=args.q,
        layers=args.layers, seed=args.seed, reify_predicates=reify, workers=args.workers,
    )


def _sg_cfg(args):
    from .embeddings import SkipGramConfig

    return SkipGramConfig(
        dimension=args.dim, window=args.window, negatives=args.negatives, epochs=args.epochs,
        learning_rate=args.lr, seed=args.seed, workers=args.workers,
    )


def _matches_tsv(matches) -> str:
    rows = ["source\ttarget\tlevel\tconfidence\tkind\n"]
    rows += [f"{m.source.value}\t{m.target.value}\t{m.level}\t{m.confidence!r}\t{m.kind}\n" for m in matches]
    return "".join(rows)


# ------------------------------------------------------------------ commands

def cmd_check(args, outputs: Outputs) -> str:
    from dataclasses import replace

    from .plotting import plot_sweep
    from .reshape import original_report, render_table, within_compliance

    kg = _load(args.kg, "kg")
    onto = _load(args.onto, "ontology")
    cfg = _match_cfg(args)
    reshaped, report, matches = within_compliance(kg, onto, cfg)
    original = original_report(kg, onto, matches, reshaped, cfg.max_level)
    match_rows = [
        {"source": m.source.value, "target": m.target.value, "level": m.level, "confidence": m.confidence}
        for m in sorted(matches, key=lambda m: (m.source.value, m.target.value))
    ]
    outputs.json("report.json", {
        "config": _effective(args), "reshaped": report.to_dict(), "original": original.to_dict(), "matches": match_rows,
    })
    outputs.text("matches.tsv", _matches_tsv(matches))
    outputs.text("reshaped.nt", serialize(reshaped.graph))
    summary = {"reshaped": report.to_dict(), "original": original.to_dict()}
    table = render_table([original, report])

    if args.sweep:
        origs, reshs = [], []
        for lv in range(1, cfg.max_level + 1):
            r, rep, m = within_compliance(kg, onto, replace(cfg, max_level=lv))
            reshs.append(rep)
            origs.append(original_report(kg, onto, m, r, lv))
        outputs.json("sweep.json", {"levels": [
            {"max_level": o.max_level, "original": o.to_dict(), "reshaped": r.to_dict()} for o, r in zip(origs, reshs)
        ]})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["max_level", "scope", "used_entity_rate", "matching_rate", "confidence"])
        for o, r in zip(origs, reshs):
            for rep in (o, r):
                w.writerow([rep.max_level, rep.scope, repr(rep.used_entity_rate), repr(rep.matching_rate), repr(rep.confidence)])
        outputs.text("sweep.csv", buf.getvalue())
        table = render_table([x for pair in zip(origs, reshs) for x in pair])
        outputs.text("sweep.txt", table)
        outputs.figure("sweep.png", plot_sweep, origs, reshs)
        summary["sweep"] = [r.to_dict() for r in reshs]
    return json.dumps(summary, indent=2, sort_keys=True) + "\n" if args.format == "json" else table


def cmd_align(args, outputs: Outputs) -> str:
    from dataclasses import replace

    from .crossalign import (
        eval_spaces,
        ontology_namespaces,
        read_ground_truth,
        run_over_compliance,
        schema_kinds,
        topk_eval,
    )
    from .plotting import plot_topk

    kg1, onto1 = _load(args.kg1, "kg"), _load(args.onto1, "ontology")
    kg2, onto2 = _load(args.kg2, "kg"), _load(args.onto2, "ontology")
    mcfg, wcfg, scfg = _match_cfg(args), _walk_cfg(args, reify=True), _sg_cfg(args)
    truth = None
    if args.eval is not None:
        if not args.eval.exists():
            raise UsageError(f"{args.eval}: no such file")
        truth = read_ground_truth(args.eval)

    res = run_over_compliance(kg1, onto1, kg2, onto2, mcfg, wcfg, scfg, args.model, args.top)
    outputs.text("alignment.tsv", res.alignment.to_tsv())
    conf = res.confidence.to_dict() | {"unbridged": res.unbridged, "config": _effective(args)}
    outputs.json("confidence.json", conf)
    outputs.text("embeddings.txt", res.embedding.to_text())
    lines = [f"direct pairs: {len(res.alignment.direct)}", f"predicted pairs: {len(res.alignment.predicted)}"]
    summary = {"direct": len(res.alignment.direct), "predicted": len(res.alignment.predicted),
               "mu_within": list(res.confidence.mu_within), "unbridged": res.unbridged}

    if truth is not None:
        spaces = eval_spaces(kg1, onto1, kg2, onto2, mcfg)
        seeds = list(range(args.seed, args.seed + args.seeds))
        table = topk_eval(
            spaces, truth, (ontology_namespaces(onto1), ontology_namespaces(onto2)),
            schema_kinds(onto1, onto2), wcfg, scfg, seeds,
        )
        outputs.text("eval.json", table.to_json() + "\n")
        outputs.text("eval.txt", table.render())
        outputs.figure("eval.png", plot_topk, table)
        lines.append(table.render())
        summary["eval"] = table.to_dict()
    if args.format == "json":
        return json.dumps(summary, indent=2, sort_keys=True) + "\n"
    return "\n".join(lines) + "\n"


def cmd_fragments(args, outputs: Outputs) -> str:
    from .fragments import CriteriaConfig, joint_eval, liebig_select, load_fragment, score_fragments
    from .plotting import plot_accuracy

    kg = _load(args.kg, "kg")
    frags = []
    for path in args.mappings:
        if not path.exists():
            raise UsageError(f"{path}: no such file")
        frags.append(load_fragment(path))
    if len({f.name for f in frags}) != len(frags):
        raise UsageError("fragment names (mapping file stems) must be distinct")
    crit = CriteriaConfig()
    if args.criteria is not None:
        if not args.criteria.exists():
            raise UsageError(f"{args.criteria}: no such file")
        try:
            crit = CriteriaConfig.from_json(args.criteria)
        except (json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"{args.criteria}: {exc}") from None

    scored = score_fragments(kg, frags, crit)
    winner = liebig_select(scored)
    seeds = list(range(args.seed, args.seed + args.seeds))
    curves = {
        f.name: {str(lv): v for lv, v in joint_eval(kg, f, args.levels, _walk_cfg(args), _sg_cfg(args), seeds, args.model).items()}
        for f in frags
    }
    outputs.json("criteria.json", {f.name: v.scores for f, v in scored})
    outputs.json("selection.json", {
        "winner": winner.name,
        "ranking": [{"name": f.name, "min": v.minimum, "mean": v.mean} for f, v in scored],
        "config": _effective(args),
    })
    outputs.json("accuracy.json", curves)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fragment", "level", "mean", "sd"])
    for name in sorted(curves):
        for lv in sorted(curves[name], key=int):
            w.writerow([name, lv, repr(curves[name][lv]["mean"]), repr(curves[name][lv]["sd"])])
    outputs.text("accuracy.csv", buf.getvalue())
    outputs.figure("accuracy.png", plot_accuracy, curves)
    if args.format == "json":
        return json.dumps({"winner": winner.name, "accuracy": curves}, indent=2, sort_keys=True) + "\n"
    lines = [f"selected fragment: {winner.name}"]
    for f, v in scored:
        lines.append(f"  {f.name}: min {v.minimum:.3f} mean {v.mean:.3f}")
    return "\n".join(lines) + "\n"


def cmd_gen_fixture(args, outputs: Outputs) -> str:
    from .mismatch import MismatchSpec, generate_mismatch_fixture, read_synonyms

    onto = _load(args.onto, "ontology")
    cfg = _match_cfg(args)
    synonyms = None
    if args.synonyms is not None:
        if not args.synonyms.exists():
            raise UsageError(f"{args.synonyms}: no such file")
        synonyms = read_synonyms(args.synonyms)
    spec = MismatchSpec(args.exact, args.typo, args.synonym, args.structural, args.seed)
    kg, key = generate_mismatch_fixture(onto, spec, cfg, synonyms)
    outputs.text("mismatch_kg.nt", serialize(kg))
    outputs.text("mismatch_key.tsv", "".join(f"{p.planted.value}\t{p.origin.value}\t{p.category}\n" for p in key))
    outputs.json("fixture.json", {"spec": asdict(spec), "triples": len(kg), "plants": len(key)})
    if args.format == "json":
        return json.dumps({"triples": len(kg), "plants": len(key)}, sort_keys=True) + "\n"
    return f"planted {len(key)} terms in {len(kg)} triples\n"


def cmd_embed(args, outputs: Outputs) -> str:
    from .embeddings import WalkGraph, generate_walk_indices, train_skipgram, walks_to_text

    g = _load(args.graph, "kg")
    wcfg = _walk_cfg(args, reify=args.reify)
    wg = WalkGraph.from_graph(g, wcfg.reify_predicates)
    walks = [[wg.nodes[i] for i in w] for w in generate_walk_indices(wg, wcfg, args.model)]
    table = train_skipgram(walks, _sg_cfg(args))
    outputs.text("embeddings.txt", table.to_text())
    outputs.json("training.json", {"loss_history": table.loss_history, "config": _effective(args)})
    if args.dump_walks:
        outputs.text("walks.txt", walks_to_text(walks))
    if args.format == "json":
        return json.dumps({"nodes": len(table), "loss_history": table.loss_history}, indent=2) + "\n"
    return f"embedded {len(table)} nodes in {table.dim} dimensions; final probe loss {table.loss_history[-1]:.4f}\n"


COMMANDS = {
    "check": cmd_check,
    "align": cmd_align,
    "fragments": cmd_fragments,
    "gen-fixture": cmd_gen_fixture,
    "embed": cmd_embed,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    outputs = Outputs()
    try:
        _apply_config(args, parser)
        summary = COMMANDS[args.command](args, outputs)
        outputs.commit(args.out)
    except (UsageError, RDFSyntaxError, ValueError, OSError) as exc:
        print(f"ontocomply {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"ontocomply {args.command}: internal error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
