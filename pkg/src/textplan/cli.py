"""Command-line pipeline driver.

    textplan ingest --webnlg-xml DIR --out corpus.json
    textplan match --corpus corpus.json --out matched.json
    textplan train --matched matched.json --out model.json
    textplan plan --corpus corpus.json --model model.json --select best --out plans.jsonl
    textplan induce-templates --matched matched.json --out templates.json
    textplan realize --plans plans.jsonl --templates templates.json --out texts.txt
    textplan eval --plans plans.jsonl --texts texts.txt --out report.json

Data errors exit with status 1 and a JSON error record on stderr; usage
errors exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from itertools import zip_longest
from pathlib import Path

from .config import PipelineConfig, load_config
from .corpus import DatasetEntry, load_corpus, load_webnlg, save_corpus
from .errors import SchemaError, TextPlanError
from .evaluation import consistency_table, corpus_bleu
from .linearizer import linearize_text_plan, parse_linearized
from .matcher import build_matched_corpus, load_matched, save_matched, split_sentences
from .planlib import TextPlan, enumerate_text_plans, plan_from_json, plan_to_json
from .realizer import TemplateBank, induce_templates, realize_text_plan
from .scorer import ScoringModel, fit, rank_plans, select_ranks


def _read(path) -> bytes:
    return Path(path).read_bytes()


def _write(path, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    Path(path).write_bytes(data)


def _lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _find_graph_plan(text: str, entries: list[DatasetEntry]) -> TextPlan:
    """Parse a linearized plan against the first corpus graph that accepts it."""
    first = text.split()[0] if text.split() else ""
    last_exc: TextPlanError | None = None
    for e in entries:
        if first not in {ent.token for ent in e.graph.entities}:
            continue
        try:
            return parse_linearized(text, e.graph)
        except TextPlanError as exc:
            last_exc = exc
    if last_exc is not None:
        raise last_exc
    raise SchemaError(f"no corpus graph matches plan {text[:60]!r}")


def _read_plans(path, corpus_path=None) -> list[tuple[str, TextPlan]]:
    """Plans from a plans.jsonl file, or from a linearized file (one plan per
    line) resolved against ``corpus_path``."""
    entries = None
    out = []
    for i, line in enumerate(_lines(path)):
        if not line.strip():
            continue
        if line.lstrip().startswith("{"):
            try:
                obj = json.loads(line)
                out.append((str(obj.get("eid", "")), plan_from_json(obj["plan"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise SchemaError(f"{path}:{i + 1}: bad plan record: {exc}") from exc
        else:
            if corpus_path is None:
                raise SchemaError(f"{path}:{i + 1}: linearized plans need --corpus")
            if entries is None:
                entries = load_corpus(_read(corpus_path))
            out.append(("", _find_graph_plan(line, entries)))
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(args, cfg):
    entries = load_webnlg(args.webnlg_xml)
    _write(args.out, save_corpus(entries))
    if args.refs_out:
        # one file per reference slot, line-aligned with the corpus entries
        m = max((len(e.references) for e in entries), default=0)
        for j in range(m):
            lines = [e.references[j] if j < len(e.references) else "" for e in entries]
            _write(f"{args.refs_out}{j}.txt", "".join(l.replace("\n", " ") + "\n" for l in lines))
    print(_dump_json({"entries": len(entries), "pairs": sum(len(e.references) for e in entries)}))


def cmd_enumerate(args, cfg):
    entries = load_corpus(_read(args.corpus))
    entry = next((e for e in entries if e.eid == args.eid), None)
    if entry is None:
        raise SchemaError(f"no entry with eid {args.eid!r}")
    for plan in enumerate_text_plans(entry.graph, limit=args.limit):
        print(linearize_text_plan(plan))


def cmd_match(args, cfg):
    entries = load_corpus(_read(args.corpus))
    examples, report = build_matched_corpus(entries, cfg.levenshtein_threshold, workers=args.workers)
    _write(args.out, save_matched(examples))
    print(_dump_json(report.to_json()))


def cmd_train(args, cfg):
    examples = load_matched(_read(args.matched))
    model = fit(examples, lam=cfg.lam, all_plans=args.all_plans)
    _write(args.out, model.dumps())


def cmd_plan(args, cfg):
    entries = load_corpus(_read(args.corpus))
    model = ScoringModel.loads(_read(args.model))
    mode = cfg.selection()
    rng = random.Random(cfg.seed)
    out = []
    for e in entries:
        ranked = rank_plans(model, e.graph, cfg.max_plans)
        for rank in select_ranks(ranked, mode, rng, args.min_score):
            plan, score = ranked[rank]
            out.append(_dump_json({
                "eid": e.eid, "rank": rank, "score": score.total, "n_plans": len(ranked),
                "plan": plan_to_json(plan),
            }) + "\n")
    _write(args.out, "".join(out))


def cmd_linearize(args, cfg):
    plans = _read_plans(args.plans)
    _write(args.out, "".join(linearize_text_plan(p, unicode=args.unicode) + "\n" for _, p in plans))


def cmd_parse_plan(args, cfg):
    entries = load_corpus(_read(args.corpus))
    for line in _lines(args.text):
        if line.strip():
            print(_dump_json({"plan": plan_to_json(_find_graph_plan(line, entries))}))


def cmd_induce_templates(args, cfg):
    bank = induce_templates(load_matched(_read(args.matched)))
    _write(args.out, bank.dumps())
    print(_dump_json(dict(sorted(bank.induction_stats.items())) | {"templates": len(bank.templates)}))


def cmd_realize(args, cfg):
    bank = TemplateBank.loads(_read(args.templates)) if args.templates else TemplateBank()
    plans = _read_plans(args.plans, args.corpus)
    _write(args.out, "".join(realize_text_plan(p, bank) + "\n" for _, p in plans))


def cmd_eval(args, cfg):
    plans = _read_plans(args.plans, args.corpus)
    texts = [t for t in _lines(args.texts)]
    if len(texts) < len(plans):
        texts += [""] * (len(plans) - len(texts))
    pairs = []
    for (_, plan), text in zip(plans, texts):
        # pair sentence plans with realized sentences; extra plan sentences
        # count as unrealized
        sents = split_sentences(text).sentences
        for sp, s in zip_longest(plan.sentences, sents[:len(plan.sentences)], fillvalue=""):
            pairs.append((sp, s))
    table = consistency_table(pairs, cfg.levenshtein_threshold)
    doc = _dump_json(table.to_json())
    if args.out:
        _write(args.out, doc + "\n")
    print(doc)


def cmd_bleu(args, cfg):
    hyps = _lines(args.hyp)
    ref_files = [_lines(p) for p in args.ref]
    refs = []
    for i in range(len(hyps)):
        refs.append([rf[i] for rf in ref_files if i < len(rf) and rf[i].strip()])
    print(f"{corpus_bleu(hyps, refs):.2f}")


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="textplan", description="Symbolic text planning pipeline.")
    p.add_argument("--config", help="flat JSON config file (flags override it)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="WebNLG XML -> corpus JSON")
    s.add_argument("--webnlg-xml", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--refs-out", help="also write PREFIX0.txt, PREFIX1.txt, ... reference files")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("enumerate", help="print every plan of one input, linearized")
    s.add_argument("--corpus", required=True)
    s.add_argument("--eid", required=True)
    s.add_argument("--limit", type=int)
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("match", help="match references to consistent plans")
    s.add_argument("--corpus", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, dest="levenshtein_threshold")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("train", help="fit the plan scorer")
    s.add_argument("--matched", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--lambda", type=float, dest="lam")
    s.add_argument("--all-plans", action="store_true", help="count every consistent plan, not just the first")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("plan", help="rank plans and select some per input")
    s.add_argument("--corpus", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--select", dest="select", help="best | top-k:K | random-top:P")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-plans", type=int)
    s.add_argument("--min-score", type=float)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("linearize", help="plans.jsonl -> one linearized plan per line")
    s.add_argument("--plans", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--unicode", action="store_true")
    s.set_defaults(func=cmd_linearize)

    s = sub.add_parser("parse-plan", help="linearized plans -> plan JSON")
    s.add_argument("--text", required=True)
    s.add_argument("--corpus", required=True)
    s.set_defaults(func=cmd_parse_plan)

    s = sub.add_parser("induce-templates", help="harvest realization templates")
    s.add_argument("--matched", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_induce_templates)

    s = sub.add_parser("realize", help="template realization, one text per line")
    s.add_argument("--plans", required=True)
    s.add_argument("--templates")
    s.add_argument("--corpus", help="needed when --plans holds linearized plans")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_realize)

    s = sub.add_parser("eval", help="entity coverage and order of realizations")
    s.add_argument("--plans", required=True)
    s.add_argument("--texts", required=True)
    s.add_argument("--corpus")
    s.add_argument("--threshold", type=float, dest="levenshtein_threshold")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bleu", help="corpus BLEU against one or more reference files")
    s.add_argument("--hyp", required=True)
    s.add_argument("--ref", required=True, action="append")
    s.set_defaults(func=cmd_bleu)
    return p


def _config_from(args) -> PipelineConfig:
    base = load_config(args.config)
    select = getattr(args, "select", None)
    overrides = {
        "lam": getattr(args, "lam", None),
        "levenshtein_threshold": getattr(args, "levenshtein_threshold", None),
        "max_plans": getattr(args, "max_plans", None),
        "seed": getattr(args, "seed", None),
    }
    if select is not None:
        name, _, arg = select.partition(":")
        overrides["select_mode"] = select if name == "top-k" else name
        if name == "random-top" and arg:
            try:
                overrides["top_percent"] = float(arg)
            except ValueError:
                raise SchemaError(f"bad selection mode {select!r}") from None
    return base.merged(**overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from(args)
    except SchemaError as exc:
        if args.config is None:
            parser.error(str(exc))
        return _fail(exc)
    try:
        args.func(args, cfg)
    except (TextPlanError, OSError, UnicodeDecodeError) as exc:
        return _fail(exc)
    return 0


def _fail(exc: Exception) -> int:
    sys.stderr.write(_dump_json({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
