"""Product-of-experts plan scoring.

Four count-based experts, each Lidstone-smoothed, are multiplied (summed in
log space):

* relation direction   p(d | relation)
* global direction     p(#reversed edges | graph size)
* split sizes          p(ordered sentence sizes | graph size)
* relation transitions prod over sentences of p(r_{i+1} | r_i), ending in EOS
"""
from __future__ import annotations

import bisect
import json
import math
import random
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from math import ceil
from typing import Iterable

import numpy as np

from .corpus import InputGraph, RelationType
from .errors import BadSizes, EmptyCorpus, EmptyRanking, SchemaError, TooLarge
from .linearizer import linearize_sentence_plan
from .planlib import (
    MAX_TRIPLES,
    Direction,
    SentencePlan,
    TextPlan,
    TreeCheck,
    enumerate_ordered_partitions,
    enumerate_sentence_plans,
    subset_tree_check,
)

EOS = "EOS"
DEFAULT_LAMBDA = 0.05
MODEL_VERSION = 1
# vectorised ranking holds one float per plan; the largest 7-triple inputs
# (7-stars) have ~7.3M plans
MAX_RANKED = 10_000_000
TIE_DECIMALS = 9


def _rel_id(r) -> str:
    return r.id if isinstance(r, RelationType) else r


def _log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


@dataclass
class ScoringModel:
    lam: float = DEFAULT_LAMBDA
    dir_counts: dict[str, list[int]] = field(default_factory=dict)
    global_counts: dict[int, Counter] = field(default_factory=dict)
    split_counts: dict[int, Counter] = field(default_factory=dict)
    trans_counts: dict[str, Counter] = field(default_factory=dict)

    def __post_init__(self):
        self._refresh()

    def _refresh(self):
        self._global_tot = {n: sum(c.values()) for n, c in self.global_counts.items()}
        self._split_tot = {n: sum(c.values()) for n, c in self.split_counts.items()}
        self._trans_tot = {r: sum(c.values()) for r, c in self.trans_counts.items()}

    @property
    def relation_vocab(self) -> frozenset[str]:
        return frozenset(self.dir_counts)

    def add_plan(self, plan: TextPlan, n: int | None = None) -> None:
        n = n if n is not None else sum(plan.sizes())
        n_rev = 0
        for s in plan.sentences:
            for _, e in s.edges():
                row = self.dir_counts.setdefault(e.relation.id, [0, 0])
                rev = e.direction is Direction.REVERSE
                row[rev] += 1
                n_rev += rev
            rels = [r.id for r in s.relations()]
            for a, b in zip(rels, rels[1:] + [EOS]):
                self.trans_counts.setdefault(a, Counter())[b] += 1
                self._trans_tot[a] = self._trans_tot.get(a, 0) + 1
        self.global_counts.setdefault(n, Counter())[n_rev] += 1
        self._global_tot[n] = self._global_tot.get(n, 0) + 1
        self.split_counts.setdefault(n, Counter())[plan.sizes()] += 1
        self._split_tot[n] = self._split_tot.get(n, 0) + 1

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "lambda": self.lam,
            "dir": {r: list(v) for r, v in sorted(self.dir_counts.items())},
            "global": {
                str(n): {str(k): v for k, v in sorted(c.items())}
                for n, c in sorted(self.global_counts.items())
            },
            "split": {
                str(n): {",".join(map(str, k)): v for k, v in sorted(c.items())}
                for n, c in sorted(self.split_counts.items())
            },
            "trans": {
                r: dict(sorted(c.items())) for r, c in sorted(self.trans_counts.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScoringModel":
        if not isinstance(obj, dict) or obj.get("version") != MODEL_VERSION:
            raise SchemaError("unsupported model version")
        try:
            return cls(
                lam=float(obj["lambda"]),
                dir_counts={r: [int(v[0]), int(v[1])] for r, v in obj["dir"].items()},
                global_counts={
                    int(n): Counter({int(k): int(v) for k, v in c.items()})
                    for n, c in obj["global"].items()
                },
                split_counts={
                    int(n): Counter({tuple(int(x) for x in k.split(",")): int(v) for k, v in c.items()})
                    for n, c in obj["split"].items()
                },
                trans_counts={r: Counter({k: int(v) for k, v in c.items()}) for r, c in obj["trans"].items()},
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise SchemaError(f"bad model document: {exc}") from exc

    def dumps(self) -> bytes:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=1).encode("utf-8")

    @classmethod
    def loads(cls, data: bytes | str) -> "ScoringModel":
        try:
            return cls.from_json(json.loads(data))
        except json.JSONDecodeError as exc:
            raise SchemaError(str(exc)) from exc


def fit(examples: Iterable, lam: float = DEFAULT_LAMBDA, all_plans: bool = False) -> ScoringModel:
    """MLE counts from matched examples.  By default only the first consistent
    plan of each reference (plan_rank 0) is counted."""
    model = ScoringModel(lam=lam)
    used = 0
    for ex in examples:
        if not all_plans and ex.plan_rank != 0:
            continue
        model.add_plan(ex.plan, len(ex.graph.triples))
        used += 1
    if not used:
        raise EmptyCorpus("no plans to fit")
    return model


# -- experts -----------------------------------------------------------------

def p_direction(model: ScoringModel, relation, d: Direction) -> float:
    fwd, rev = model.dir_counts.get(_rel_id(relation), (0, 0))
    denom = fwd + rev + 2 * model.lam
    if denom == 0:
        return 0.5
    return ((rev if d is Direction.REVERSE else fwd) + model.lam) / denom


def p_global_direction(model: ScoringModel, n_reversed: int, graph_size: int) -> float:
    if not 0 <= n_reversed <= graph_size:
        return 0.0
    c = model.global_counts.get(graph_size, {}).get(n_reversed, 0)
    denom = model._global_tot.get(graph_size, 0) + (graph_size + 1) * model.lam
    if denom == 0:
        return 1 / (graph_size + 1)
    return (c + model.lam) / denom


def p_split(model: ScoringModel, sizes: Sequence[int], graph_size: int) -> float:
    sizes = tuple(sizes)
    if not sizes or any(s < 1 for s in sizes) or sum(sizes) != graph_size:
        raise BadSizes(f"{sizes} is not a composition of {graph_size}")
    support = 2 ** (graph_size - 1)
    c = model.split_counts.get(graph_size, {}).get(sizes, 0)
    denom = model._split_tot.get(graph_size, 0) + support * model.lam
    if denom == 0:
        return 1 / support
    return (c + model.lam) / denom


def p_transition(model: ScoringModel, src, dst) -> float:
    src, dst = _rel_id(src), _rel_id(dst)
    support = len(model.dir_counts) + 1
    c = model.trans_counts.get(src, {}).get(dst, 0)
    denom = model._trans_tot.get(src, 0) + support * model.lam
    if denom == 0:
        return 1 / support
    return (c + model.lam) / denom


def _sentence_transition_logs(model, sp: SentencePlan) -> list[float]:
    rels = [r.id for r in sp.relations()]
    return [_log(p_transition(model, a, b)) for a, b in zip(rels, rels[1:] + [EOS])] if rels else []


def _sentence_direction_logs(model, sp: SentencePlan) -> list[float]:
    return [_log(p_direction(model, e.relation, e.direction)) for _, e in sp.edges()]


def p_transitions(model: ScoringModel, plan: TextPlan) -> float:
    prob = 1.0
    for s in plan.sentences:
        rels = [r.id for r in s.relations()]
        for a, b in zip(rels, rels[1:] + [EOS]):
            prob *= p_transition(model, a, b)
    return prob


@dataclass(frozen=True)
class PlanScore:
    total: float
    direction: float
    global_direction: float
    split: float
    transitions: float

    @property
    def parts(self) -> dict[str, float]:
        return {
            "direction": self.direction,
            "global_direction": self.global_direction,
            "split": self.split,
            "transitions": self.transitions,
        }


def _combine(direction, global_direction, split, transitions):
    # fixed summation order; the vectorised ranker reproduces it exactly
    return direction + global_direction + split + transitions


def score_plan(model: ScoringModel, plan: TextPlan, graph_size: int | None = None) -> PlanScore:
    n = graph_size if graph_size is not None else sum(plan.sizes())
    direction = sum(math.fsum(_sentence_direction_logs(model, s)) for s in plan.sentences)
    transitions = sum(math.fsum(_sentence_transition_logs(model, s)) for s in plan.sentences)
    gd = _log(p_global_direction(model, plan.n_reversed(), n))
    sp = _log(p_split(model, plan.sizes(), n))
    return PlanScore(_combine(direction, gd, sp, transitions), direction, gd, sp, transitions)


# -- ranking -----------------------------------------------------------------

class Ranking(Sequence):
    """All plans of a graph ordered by score, best first.

    Scores are computed for every plan in one vectorised pass; plan objects
    are only built for the positions that are accessed.  Ties (totals equal
    to ``TIE_DECIMALS`` places) are ordered by linearization, resolved lazily
    per tie group.
    """

    def __init__(self, model: ScoringModel, graph: InputGraph, max_plans: int = MAX_RANKED,
                 max_triples: int = MAX_TRIPLES):
        self.model, self.graph = model, graph
        n = len(graph.triples)
        block_cache: dict[tuple, tuple | None] = {}
        self._parts: list[list[list[SentencePlan]]] = []
        offsets = [0]
        for blocks in enumerate_ordered_partitions(graph, max_triples):
            stats = []
            for b in blocks:
                if b not in block_cache:
                    block_cache[b] = self._block_stats(b)
                stats.append(block_cache[b])
            if any(s is None for s in stats):
                continue
            self._parts.append((blocks, stats))
            offsets.append(offsets[-1] + math.prod(len(s[0]) for s in stats))
            if offsets[-1] > max_plans:
                raise TooLarge(f"more than {max_plans} plans")
        if offsets[-1] == 0:
            raise EmptyRanking("graph has no valid plan")
        self._offsets = offsets

        gd_log = np.array([_log(p_global_direction(model, k, n)) for k in range(n + 1)])
        totals = np.empty(offsets[-1])
        for i, (blocks, stats) in enumerate(self._parts):
            d, t, r = stats[0][1], stats[0][2], stats[0][3]
            for s in stats[1:]:
                d = np.add.outer(d, s[1]).ravel()
                t = np.add.outer(t, s[2]).ravel()
                r = np.add.outer(r, s[3]).ravel()
            split = _log(p_split(model, [len(b) for b in blocks], n))
            totals[offsets[i]:offsets[i + 1]] = d + gd_log[r] + split + t
        self.totals = totals
        keys = np.round(totals, TIE_DECIMALS)
        self._order = np.argsort(-keys, kind="stable")
        sk = keys[self._order]
        self._group_starts = [0] + (np.flatnonzero(sk[1:] != sk[:-1]) + 1).tolist()
        self._resolved: set[int] = set()

    def _block_stats(self, block):
        if subset_tree_check(block) is not TreeCheck.TREE:
            return None
        plans = enumerate_sentence_plans(block)
        d = np.array([math.fsum(_sentence_direction_logs(self.model, sp)) for sp in plans])
        t = np.array([math.fsum(_sentence_transition_logs(self.model, sp)) for sp in plans])
        r = np.array([sum(e.direction is Direction.REVERSE for _, e in sp.edges()) for sp in plans])
        lin = [linearize_sentence_plan(sp) for sp in plans]
        return plans, d, t, r, lin

    def __len__(self):
        return self._offsets[-1]

    def _locate(self, idx: int) -> tuple[list, list[int]]:
        p = bisect.bisect_right(self._offsets, idx) - 1
        stats = self._parts[p][1]
        rem = idx - self._offsets[p]
        local = []
        for s in reversed(stats):
            rem, k = divmod(rem, len(s[0]))
            local.append(k)
        return stats, local[::-1]

    def plan_at(self, idx: int) -> TextPlan:
        """Plan at enumeration index ``idx`` (not rank)."""
        stats, local = self._locate(idx)
        return TextPlan(tuple(s[0][k] for s, k in zip(stats, local)), self.graph)

    def linearization_at(self, idx: int) -> str:
        stats, local = self._locate(idx)
        return " . ".join(s[4][k] for s, k in zip(stats, local))

    def _resolve_group(self, g: int):
        start = self._group_starts[g]
        end = self._group_starts[g + 1] if g + 1 < len(self._group_starts) else len(self)
        if end - start > 1:
            idx = self._order[start:end]
            lin = [self.linearization_at(int(i)) for i in idx]
            perm = sorted(range(len(idx)), key=lambda k: (lin[k], int(idx[k])))
            self._order[start:end] = idx[perm]
        self._resolved.add(g)

    def index_at_rank(self, rank: int) -> int:
        g = bisect.bisect_right(self._group_starts, rank) - 1
        if g not in self._resolved:
            self._resolve_group(g)
        return int(self._order[rank])

    def __getitem__(self, rank):
        if isinstance(rank, slice):
            return [self[i] for i in range(*rank.indices(len(self)))]
        if rank < 0:
            rank += len(self)
        if not 0 <= rank < len(self):
            raise IndexError(rank)
        plan = self.plan_at(self.index_at_rank(rank))
        return plan, score_plan(self.model, plan, len(self.graph.triples))

    def count_at_least(self, min_score: float) -> int:
        return int(np.count_nonzero(self.totals >= min_score))


def rank_plans(model: ScoringModel, graph: InputGraph, max_plans: int = MAX_RANKED) -> Ranking:
    return Ranking(model, graph, max_plans)


# -- selection ---------------------------------------------------------------

@dataclass(frozen=True)
class Selection:
    kind: str = "best"  # best | top_k | random_top_percent
    k: int = 1
    percent: float = 10.0
    seed: int | None = None

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> "Selection":
        """``best``, ``top-k:K`` or ``random-top:P`` (P in percent)."""
        if text == "best":
            return cls("best", seed=seed)
        name, _, arg = text.partition(":")
        if name == "top-k" and arg.isdigit() and int(arg) >= 1:
            return cls("top_k", k=int(arg), seed=seed)
        if name == "random-top":
            try:
                p = float(arg)
            except ValueError:
                p = -1
            if 0 < p <= 100:
                return cls("random_top_percent", percent=p, seed=seed)
        raise ValueError(f"bad selection mode {text!r}")


def top_count(n: int, percent: float) -> int:
    """Size of the top ``percent``% of ``n`` ranked plans, at least 1."""
    return max(1, ceil(percent * n / 100 - 1e-9))


def select_ranks(ranked: Sequence, mode: Selection, rng: random.Random | None = None,
                 min_score: float | None = None) -> list[int]:
    n = len(ranked)
    if min_score is not None:
        if isinstance(ranked, Ranking):
            n = min(n, ranked.count_at_least(min_score))
        else:
            n = sum(1 for _, s in ranked if s.total >= min_score)
    if n == 0:
        raise EmptyRanking("no plan to select")
    if mode.kind == "best":
        return [0]
    if mode.kind == "top_k":
        return list(range(min(mode.k, n)))
    if mode.kind == "random_top_percent":
        top = top_count(n, mode.percent)
        rng = rng or random.Random(mode.seed)
        return [rng.randrange(top)]
    raise ValueError(f"unknown selection kind {mode.kind!r}")


def select_plans(ranked: Sequence, mode: Selection, rng: random.Random | None = None,
                 min_score: float | None = None) -> list[TextPlan]:
    return [ranked[i][0] for i in select_ranks(ranked, mode, rng, min_score)]
