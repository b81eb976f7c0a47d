"""Corpus-level experiment protocols shared by the acceptance suite and scripts/.

All of these need the WebNLG release on disk; see ``webnlg_paths``.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import DatasetEntry, load_webnlg
from .errors import TextPlanError
from .evaluation import corpus_bleu
from .matcher import MATCH_THRESHOLD, MatchReport, MatchedExample, build_matched_corpus
from .planlib import Direction
from .realizer import TemplateBank, induce_templates, realize_text_plan
from .scorer import (
    DEFAULT_LAMBDA,
    ScoringModel,
    Selection,
    fit,
    p_direction,
    rank_plans,
    select_ranks,
    top_count,
)


@dataclass(frozen=True)
class WebNLGPaths:
    train: Path
    test: Path | None


def webnlg_paths(root: str | Path | None = None) -> WebNLGPaths | None:
    """Locate the release.  ``WEBNLG_TRAIN`` / ``WEBNLG_TEST`` override the
    defaults ``$WEBNLG_DIR/train`` and ``$WEBNLG_DIR/test``; each may be an XML
    file or a directory of XML files."""
    root = root or os.environ.get("WEBNLG_DIR")
    train = os.environ.get("WEBNLG_TRAIN") or (Path(root) / "train" if root else None)
    test = os.environ.get("WEBNLG_TEST") or (Path(root) / "test" if root else None)
    if train is None or not Path(train).exists():
        return None
    return WebNLGPaths(Path(train), Path(test) if test and Path(test).exists() else None)


@dataclass
class TrainingRun:
    entries: list[DatasetEntry]
    examples: list[MatchedExample]
    report: MatchReport
    model: ScoringModel
    bank: TemplateBank


def train_on(path: str | Path, threshold: float = MATCH_THRESHOLD, lam: float = DEFAULT_LAMBDA,
             workers: int | None = None) -> TrainingRun:
    entries = load_webnlg(path)
    examples, report = build_matched_corpus(entries, threshold, workers=workers or os.cpu_count())
    return TrainingRun(entries, examples, report, fit(examples, lam), induce_templates(examples))


def direction_probability(model: ScoringModel, relation: str = "manager") -> dict[str, float]:
    return {d.value: p_direction(model, relation, d) for d in Direction}


def seen_entries(test: list[DatasetEntry], train: list[DatasetEntry]) -> list[DatasetEntry]:
    cats = {e.category for e in train}
    return [e for e in test if e.category in cats]


@dataclass
class DiversityRun:
    seed: int
    percent: float = 10.0
    outputs: list[str] = field(default_factory=list)
    ranks: list[int] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    bleu: float | None = None

    @property
    def all_in_top(self) -> bool:
        return all(r < top_count(n, self.percent) for r, n in zip(self.ranks, self.sizes))


def diversity_protocol(model: ScoringModel, bank: TemplateBank, entries: list[DatasetEntry],
                       seeds=(1, 2, 3), percent: float = 10.0) -> list[DiversityRun]:
    """Realize one random plan from the top ``percent`` per input, once per
    seed.  Each input is ranked once; every seed keeps its own generator, so
    the draws match running the seeds one after another."""
    mode = Selection.parse(f"random-top:{percent:g}")
    runs = [DiversityRun(seed, percent) for seed in seeds]
    rngs = [random.Random(seed) for seed in seeds]
    for e in entries:
        try:
            ranked = rank_plans(model, e.graph)
        except TextPlanError as exc:  # recorded; the protocol counts failures
            for run in runs:
                run.errors.append(f"{e.eid}: {type(exc).__name__}: {exc}")
                run.outputs.append("")
            continue
        for run, rng in zip(runs, rngs):
            (r,) = select_ranks(ranked, mode, rng)
            run.outputs.append(realize_text_plan(ranked[r][0], bank))
            run.ranks.append(r)
            run.sizes.append(len(ranked))
        del ranked
    refs = [list(e.references) or [""] for e in entries]
    for run in runs:
        run.bleu = corpus_bleu(run.outputs, refs)
    return runs
