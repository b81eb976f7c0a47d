"""Deterministic template realization of text plans.

Every (relation, direction) pair maps to a pattern such as
``"{h} is the capital of {m}"``.  A sentence plan is rendered recursively:
siblings are joined with "and", and a non-root node that has children of its
own opens a ", which" clause.  Entity mentions therefore come out exactly once
each, in pre-order.
"""
from __future__ import annotations

import calendar
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import Entity, EntityKind, RelationType
from .errors import BadDate, SchemaError
from .matcher import MatchedExample, recognize_entities
from .planlib import Direction, PlanNode, SentencePlan, TextPlan

TEMPLATES_VERSION = 1
_ISO_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
# fixed English names; calendar.month_name follows the process locale
MONTH_NAMES = (
    "January", "February", "March", "April", "May", "June", "July",
    "August", "September", "October", "November", "December",
)


@dataclass(frozen=True)
class Template:
    relation: str
    direction: Direction
    pattern: str
    source: str = "default"  # "induced" or "default"

    def __post_init__(self):
        if not valid_pattern(self.pattern):
            raise ValueError(f"bad template pattern {self.pattern!r}")

    @property
    def predicate(self) -> str:
        return self.pattern[len("{h} "):]


def valid_pattern(pattern: str) -> bool:
    return (
        pattern.startswith("{h} ")
        and pattern.count("{h}") == 1
        and pattern.count("{m}") == 1
        and pattern.index("{h}") < pattern.index("{m}")
    )


def default_template(relation: RelationType, direction: Direction) -> Template:
    words = " ".join(relation.tokens)
    if direction is Direction.FORWARD:
        pattern = f"{{h}} 's {words} is {{m}}"
    else:
        pattern = f"{{h}} is the {words} of {{m}}"
    return Template(relation.id, direction, pattern, "default")


@dataclass
class TemplateBank:
    templates: dict[tuple[str, Direction], Template] = field(default_factory=dict)
    induction_stats: Counter = field(default_factory=Counter)

    def lookup(self, relation: RelationType, direction: Direction) -> Template:
        t = self.templates.get((relation.id, direction))
        return t if t is not None else default_template(relation, direction)

    def to_json(self) -> dict:
        return {
            "version": TEMPLATES_VERSION,
            "templates": {
                f"{rel}|{d.value}": t.pattern
                for (rel, d), t in sorted(self.templates.items(), key=lambda kv: (kv[0][0], kv[0][1].value))
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TemplateBank":
        if not isinstance(obj, dict) or obj.get("version") != TEMPLATES_VERSION:
            raise SchemaError("unsupported template bank version")
        bank = cls()
        try:
            for key, pattern in obj["templates"].items():
                rel, d = key.rsplit("|", 1)
                bank.templates[(rel, Direction(d))] = Template(rel, Direction(d), pattern, "induced")
        except (KeyError, ValueError, AttributeError) as exc:
            raise SchemaError(f"bad template entry: {exc}") from exc
        return bank

    def dumps(self) -> bytes:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=1).encode("utf-8")

    @classmethod
    def loads(cls, data: bytes | str) -> "TemplateBank":
        try:
            return cls.from_json(json.loads(data))
        except json.JSONDecodeError as exc:
            raise SchemaError(str(exc)) from exc


def induce_templates(examples: Iterable[MatchedExample]) -> TemplateBank:
    """Harvest patterns from matched single-edge sentences in which both
    entities were recognised; the most frequent pattern per (relation,
    direction) wins, ties going to the lexicographically smaller pattern."""
    counts: dict[tuple[str, Direction], Counter] = defaultdict(Counter)
    stats: Counter = Counter()
    for ex in examples:
        for sentence, sp in ex.per_sentence_pairs:
            edges = sp.edges()
            if len(edges) != 1:
                continue
            head, edge = edges[0]
            stats["single_edge"] += 1
            found = {m.entity: m for m in recognize_entities(sentence, [head, edge.child.entity])}
            if head not in found or edge.child.entity not in found:
                continue
            (hs, he), (ms, me) = found[head].char_span, found[edge.child.entity].char_span
            if not he <= ms:
                stats["discarded"] += 1
                continue
            pattern = sentence[:hs] + "{h}" + sentence[he:ms] + "{m}" + sentence[me:]
            pattern = " ".join(pattern.split()).rstrip(" .!?")
            if not valid_pattern(pattern):
                stats["discarded"] += 1
                continue
            counts[(edge.relation.id, edge.direction)][pattern] += 1
            stats["candidates"] += 1
    bank = TemplateBank(induction_stats=stats)
    for key, c in counts.items():
        pattern = min(c, key=lambda p: (-c[p], p))
        bank.templates[key] = Template(key[0], key[1], pattern, "induced")
    return bank


# -- post-processing ---------------------------------------------------------

def _ordinal(day: int) -> str:
    if 11 <= day % 100 <= 13:
        return f"{day}th"
    suffix = {1: "st", 2: "nd", 3: "rd"}.get(day % 10, "th")
    return f"{day}{suffix}"


def lexicalize_date(iso: str) -> str:
    """``"1776-07-04"`` -> ``"July 4th, 1776"``."""
    m = _ISO_RE.match(iso.strip().strip('"'))
    if not m:
        raise BadDate(f"not an ISO date: {iso!r}")
    year, month, day = (int(x) for x in m.groups())
    if not 1 <= month <= 12 or not 1 <= day <= calendar.monthrange(year, month)[1]:
        raise BadDate(f"invalid date: {iso!r}")
    return f"{MONTH_NAMES[month - 1]} {_ordinal(day)}, {year}"


def lexicalize_unit(value: str, unit: str) -> str:
    return value.strip().strip('"') + " " + unit.strip().strip("()")


def mention(entity: Entity) -> str:
    if entity.kind is EntityKind.DATE:
        try:
            return lexicalize_date(entity.id)
        except BadDate:
            return entity.surface
    if entity.kind is EntityKind.UNIT:
        return lexicalize_unit(entity.value or "", entity.unit or "")
    return entity.surface


def _render(node: PlanNode, bank: TemplateBank, is_root: bool) -> str:
    text = mention(node.entity)
    if node.children and not is_root:
        text += ", which"
    for j, edge in enumerate(node.children):
        before, _, after = bank.lookup(edge.relation, edge.direction).predicate.partition("{m}")
        text += (" " if j == 0 else " and ") + before + _render(edge.child, bank, False) + after
    return text


def realize_sentence_plan(plan: SentencePlan, bank: TemplateBank | None = None) -> str:
    text = _render(plan.root, bank or TemplateBank(), True)
    return text[:1].upper() + text[1:] + "."


def realize_text_plan(plan: TextPlan, bank: TemplateBank | None = None) -> str:
    return " ".join(realize_sentence_plan(s, bank) for s in plan.sentences)
