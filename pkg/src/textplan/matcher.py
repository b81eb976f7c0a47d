"""Recover latent text plans for (graph, reference) pairs.

A reference is split into sentences, input entities are located in each
sentence with token-level fuzzy matching, and a plan is kept when its sentence
division and entity order agree with what was found in the text.
"""
from __future__ import annotations

import itertools
import json
import math
import re
import unicodedata
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .corpus import DatasetEntry, Entity, EntityKind, InputGraph, Triple
from .errors import SchemaError
from .planlib import (
    SentencePlan,
    TextPlan,
    TreeCheck,
    enumerate_sentence_plans,
    plan_from_json,
    plan_to_json,
    subset_tree_check,
)

MATCH_THRESHOLD = 0.80
MIN_TOKEN_FRACTION = 2 / 3
MAX_PLANS_PER_REFERENCE = 10_000
MATCHED_VERSION = 1

# -- sentence splitting -------------------------------------------------------

ABBREVIATIONS = frozenset(
    """mr mrs ms dr prof st mt ft no nos approx etc jr sr vs inc ltd co corp
    gen col lt sgt capt cpt adm rev hon est fig vol op pp ca cf al dept univ
    jan feb mar apr jun jul aug sep sept oct nov dec
    e.g i.e u.s u.k a.d b.c""".split()
)

_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*(?=\s|$)")
_INITIALS_RE = re.compile(r"^(?:[^\W\d_]\.)*[^\W\d_]$")


@dataclass(frozen=True)
class SentenceSplit:
    sentences: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...]


def _is_abbreviation(text: str, dot: int) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:dot].lstrip("\"'([").lower()
    if not word:
        return False
    return word in ABBREVIATIONS or bool(_INITIALS_RE.match(word))


def split_sentences(text: str) -> SentenceSplit:
    """Rule-based splitter: break after . ! ? when followed by whitespace and a
    capital letter (or the end of the text), except after known abbreviations
    and initials, and never inside a double-quoted span."""
    spans = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        if text.count('"', 0, end) % 2:
            continue
        rest = text[end:].lstrip()
        if rest:
            nxt = rest.lstrip("\"'(")[:1]
            if not nxt.isupper():
                continue
        if text[m.start()] == "." and m.end() - m.start() == 1 and _is_abbreviation(text, m.start()):
            continue
        spans.append((start, end))
        start = end
    if start < len(text):
        spans.append((start, len(text)))
    out_spans, sents = [], []
    for a, b in spans:
        chunk = text[a:b]
        lead = len(chunk) - len(chunk.lstrip())
        piece = chunk.strip()
        if piece:
            sents.append(piece)
            out_spans.append((a + lead, a + lead + len(piece)))
    if not sents:
        return SentenceSplit((text,), ((0, len(text)),))
    return SentenceSplit(tuple(sents), tuple(out_spans))


# -- fuzzy token matching -----------------------------------------------------

_WORD_RE = re.compile(r"[^\W_]+(?:[.'’&/\-][^\W_]+)*")


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@lru_cache(maxsize=200_000)
def similarity(a: str, b: str) -> float:
    """Normalised Levenshtein similarity in [0, 1].  Tokens containing digits
    must match exactly."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    if any(c.isdigit() for c in a + b):
        return 0.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def normalize_token(tok: str) -> str:
    tok = unicodedata.normalize("NFKD", tok.lower())
    return "".join(c for c in tok if c.isalnum() and not unicodedata.combining(c))


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """(normalised token, char start, char end) for each word in ``text``."""
    out = []
    for m in _WORD_RE.finditer(text):
        norm = normalize_token(m.group())
        if norm:
            out.append((norm, m.start(), m.end()))
    return out


@lru_cache(maxsize=100_000)
def _entity_tokens(entity_id: str, kind: EntityKind, value: str | None) -> tuple[str, ...]:
    if kind is EntityKind.UNIT and value:
        text = value
    else:
        text = entity_id.replace("_", " ")
        # parenthesised disambiguators rarely surface in text
        stripped = re.sub(r"\([^)]*\)", " ", text)
        if stripped.strip():
            text = stripped
    return tuple(t for t, _, _ in tokenize(text))


def entity_tokens(entity: Entity) -> tuple[str, ...]:
    return _entity_tokens(entity.id, entity.kind, entity.value)


# -- date expressions ---------------------------------------------------------

MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11, "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7, "aug": 8,
    "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}
_MONTH = "(?P<month>" + "|".join(sorted(MONTHS, key=len, reverse=True)) + r")\.?"
_DAY = r"(?P<day>\d{1,2})(?:st|nd|rd|th)?"
_YEAR = r"(?P<year>\d{4})"
_DATE_PATTERNS = [
    re.compile(rf"\b{_MONTH}\s+{_DAY},?\s+{_YEAR}\b", re.I),
    re.compile(rf"\b{_DAY}\s+(?:of\s+)?{_MONTH},?\s+{_YEAR}\b", re.I),
    re.compile(r"\b(?P<year>\d{4})-(?P<month>\d{2})-(?P<day>\d{2})\b"),
    re.compile(rf"\b{_MONTH},?\s+{_YEAR}\b", re.I),
    re.compile(rf"(?<![\d-]){_YEAR}(?![\d-])"),
]


def find_dates(text: str) -> list[tuple[int, int, int, int | None, int | None]]:
    """(start, end, year, month, day) for every date-like expression."""
    out = []
    for pat in _DATE_PATTERNS:
        for m in pat.finditer(text):
            g = m.groupdict()
            month = g.get("month")
            if month is not None:
                month = int(month) if month.isdigit() else MONTHS[month.lower()]
            day = int(g["day"]) if g.get("day") else None
            out.append((m.start(), m.end(), int(g["year"]), month, day))
    # drop partial forms (bare year, month-year) nested in a more specific date
    return [
        a for a in out
        if not any(b is not a and b[0] <= a[0] and a[1] <= b[1] and (b[3], b[4]).count(None) < (a[3], a[4]).count(None)
                   for b in out)
    ]


def _iso_parts(entity: Entity) -> tuple[int, int, int]:
    y, m, d = entity.id.split("-")
    return int(y), int(m), int(d)


# -- entity recognition -------------------------------------------------------

@dataclass(frozen=True)
class EntityMention:
    entity: Entity
    sentence_index: int
    token_span: tuple[int, int]
    score: float
    char_span: tuple[int, int] = field(default=(0, 0), compare=False)


def _entities_of(graph_or_entities) -> list[Entity]:
    if isinstance(graph_or_entities, InputGraph):
        return list(graph_or_entities.entities)
    return list(dict.fromkeys(graph_or_entities))


def recognize_entities(
    sentence: str,
    graph_or_entities: InputGraph | Iterable[Entity],
    threshold: float = MATCH_THRESHOLD,
    min_fraction: float = MIN_TOKEN_FRACTION,
    sentence_index: int = 0,
) -> list[EntityMention]:
    """Find input entities in ``sentence``, in textual order.

    Each entity's tokens are aligned against contiguous sentence tokens; a run
    of at least ``min_fraction`` of the entity's tokens, each with similarity
    >= ``threshold``, is a candidate.  Dates are found through date
    expressions.  Overlaps are resolved greedily, longest span first, and each
    entity is used at most once.
    """
    toks = tokenize(sentence)
    words = [t for t, _, _ in toks]
    # candidate: (token length, coverage, score, -start, entity order, start, end)
    cands = []
    dates = None
    for order, ent in enumerate(_entities_of(graph_or_entities)):
        if ent.kind is EntityKind.DATE:
            if dates is None:
                dates = find_dates(sentence)
            y, mo, d = _iso_parts(ent)
            for cs, ce, yy, mm, dd in dates:
                if yy != y or (mm is not None and mm != mo) or (dd is not None and dd != d):
                    continue
                ti = [i for i, (_, s, e) in enumerate(toks) if s < ce and e > cs]
                if not ti:
                    continue
                parts = 1 + (mm is not None) + (dd is not None)
                cands.append((len(ti), parts / 3, 1.0, -ti[0], order, ent, ti[0], ti[-1] + 1))
            continue
        etoks = entity_tokens(ent)
        k = len(etoks)
        if k == 0:
            continue
        need = max(1, math.ceil(min_fraction * k - 1e-9))
        for i in range(len(words)):
            for j in range(k):
                run, total = 0, 0.0
                while i + run < len(words) and j + run < k:
                    s = similarity(words[i + run], etoks[j + run])
                    if s < threshold:
                        break
                    total += s
                    run += 1
                if run >= need:
                    cands.append((run, run / k, total / run, -i, order, ent, i, i + run))
    cands.sort(key=lambda c: (-c[0], -c[1], -c[2], -c[3], c[4]))
    used_ents, taken = set(), [False] * len(words)
    found = []
    for run, _, score, _, _, ent, a, b in cands:
        if ent in used_ents or any(taken[a:b]):
            continue
        used_ents.add(ent)
        for x in range(a, b):
            taken[x] = True
        found.append(EntityMention(ent, sentence_index, (a, b), score, (toks[a][1], toks[b - 1][2])))
    found.sort(key=lambda m: m.token_span)
    return found


# -- consistency --------------------------------------------------------------

def potentially_consistent(subset: Iterable[Triple], sentence_mentions) -> bool:
    """Every triple touches a mentioned entity and every mentioned entity is
    covered by some triple."""
    mentioned = {m.entity if isinstance(m, EntityMention) else m for m in sentence_mentions}
    covered = set()
    for t in subset:
        if t.subject not in mentioned and t.object not in mentioned:
            return False
        covered.update((t.subject, t.object))
    return mentioned <= covered


def is_consistent(sentence_entities: Sequence, plan_sentence: SentencePlan, prior_plan_entities) -> bool:
    """Recognised entities form an in-order subsequence of the plan's
    pre-order entities, and every plan entity left unmatched already occurred
    earlier in the text plan."""
    se = [m.entity if isinstance(m, EntityMention) else m for m in sentence_entities]
    prior = set(prior_plan_entities)
    it = 0
    for pe in plan_sentence.entities():
        if it < len(se) and se[it] == pe:
            it += 1
        elif pe not in prior:
            return False
    return it == len(se)


def _divisions(graph: InputGraph, mentioned: list[set[Entity]]) -> list[tuple[tuple[Triple, ...], ...]]:
    """Ordered divisions of the triples, one block per sentence, where each
    block is potentially consistent with its sentence."""
    n_sent = len(mentioned)
    triples = graph.triples
    options = [
        [i for i in range(n_sent) if t.subject in mentioned[i] or t.object in mentioned[i]]
        for t in triples
    ]
    if n_sent > len(triples) or any(not o for o in options):
        return []
    out = []
    blocks: list[list[Triple]] = [[] for _ in range(n_sent)]

    def assign(k: int, n_empty: int):
        if n_empty > len(triples) - k:
            return
        if k == len(triples):
            if all(potentially_consistent(b, mentioned[i]) for i, b in enumerate(blocks)):
                out.append(tuple(tuple(b) for b in blocks))
            return
        for s in options[k]:
            was_empty = not blocks[s]
            blocks[s].append(triples[k])
            assign(k + 1, n_empty - was_empty)
            blocks[s].pop()

    assign(0, n_sent)
    return out


@dataclass(frozen=True)
class ReferenceMatch:
    split: SentenceSplit
    mentions: tuple[tuple[EntityMention, ...], ...]
    plans: tuple[TextPlan, ...]


def match_reference_detailed(
    graph: InputGraph,
    reference: str,
    threshold: float = MATCH_THRESHOLD,
    max_plans: int = MAX_PLANS_PER_REFERENCE,
) -> ReferenceMatch:
    split = split_sentences(reference)
    mentions = tuple(
        tuple(recognize_entities(s, graph, threshold, sentence_index=i))
        for i, s in enumerate(split.sentences)
    )
    mentioned = [{m.entity for m in ms} for ms in mentions]
    plans: list[TextPlan] = []
    cache: dict[tuple[Triple, ...], list[SentencePlan] | None] = {}
    for blocks in _divisions(graph, mentioned):
        per_sentence = []
        prior: set[Entity] = set()
        for i, block in enumerate(blocks):
            if block not in cache:
                ok = subset_tree_check(block) is TreeCheck.TREE
                cache[block] = enumerate_sentence_plans(block) if ok else None
            candidates = cache[block]
            if candidates is None:
                break
            good = [sp for sp in candidates if is_consistent(mentions[i], sp, prior)]
            if not good:
                break
            per_sentence.append(good)
            for t in block:
                prior.update((t.subject, t.object))
        else:
            for combo in itertools.product(*per_sentence):
                plans.append(TextPlan(combo, graph))
                if len(plans) >= max_plans:
                    return ReferenceMatch(split, mentions, tuple(plans))
    return ReferenceMatch(split, mentions, tuple(plans))


def match_reference(graph: InputGraph, reference: str, threshold: float = MATCH_THRESHOLD) -> list[TextPlan]:
    return list(match_reference_detailed(graph, reference, threshold).plans)


# -- corpus construction ------------------------------------------------------

@dataclass(frozen=True)
class MatchedExample:
    graph: InputGraph
    reference: str
    plan: TextPlan
    per_sentence_pairs: tuple[tuple[str, SentencePlan], ...]
    eid: str = ""
    plan_rank: int = 0
    n_consistent: int = 1


@dataclass
class MatchReport:
    pairs: int = 0
    matched: int = 0
    examples: int = 0
    histogram: Counter = field(default_factory=Counter)

    @property
    def rate(self) -> float | None:
        return self.matched / self.pairs if self.pairs else None

    def to_json(self) -> dict:
        return {
            "pairs": self.pairs,
            "matched": self.matched,
            "rate": self.rate,
            "examples": self.examples,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def _match_pair(args):
    graph, reference, threshold, max_plans = args
    return match_reference_detailed(graph, reference, threshold, max_plans)


def build_matched_corpus(
    entries: Iterable[DatasetEntry],
    threshold: float = MATCH_THRESHOLD,
    max_plans: int = MAX_PLANS_PER_REFERENCE,
    workers: int | None = None,
) -> tuple[list[MatchedExample], MatchReport]:
    pairs = [(e, ref) for e in entries for ref in e.references]
    jobs = [(e.graph, ref, threshold, max_plans) for e, ref in pairs]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_match_pair, jobs, chunksize=64))
    else:
        results = [_match_pair(j) for j in jobs]

    report = MatchReport(pairs=len(pairs))
    examples = []
    for (entry, ref), res in zip(pairs, results):
        n = len(res.plans)
        report.histogram[n] += 1
        if n:
            report.matched += 1
        for rank, plan in enumerate(res.plans):
            examples.append(
                MatchedExample(
                    entry.graph, ref, plan,
                    tuple(zip(res.split.sentences, plan.sentences)),
                    entry.eid, rank, n,
                )
            )
    report.examples = len(examples)
    return examples, report


def save_matched(examples: Iterable[MatchedExample]) -> bytes:
    doc = {
        "version": MATCHED_VERSION,
        "examples": [
            {
                "eid": ex.eid,
                "reference": ex.reference,
                "plan": plan_to_json(ex.plan),
                "plan_rank": ex.plan_rank,
                "n_consistent": ex.n_consistent,
            }
            for ex in examples
        ],
    }
    return json.dumps(doc, ensure_ascii=False).encode("utf-8")


def load_matched(data: bytes | str) -> list[MatchedExample]:
    """Inverse of save_matched.  The input graph is recovered from the plan
    edges, which express every triple exactly once."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"matched corpus is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MATCHED_VERSION:
        raise SchemaError("unsupported matched-corpus version")
    out = []
    try:
        for ex in doc["examples"]:
            plan = plan_from_json(ex["plan"])
            sents = split_sentences(ex["reference"]).sentences
            out.append(
                MatchedExample(
                    plan.source, ex["reference"], plan,
                    tuple(zip(sents, plan.sentences)),
                    ex["eid"], ex["plan_rank"], ex["n_consistent"],
                )
            )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad matched example: {exc}") from exc
    return out
