"""Bracketed pre-order serialisation of plans, and its parser.

Grammar (tokens separated by single spaces)::

    plan     := sentence (" . " sentence)*
    sentence := node
    node     := ENTITY edge*
    edge     := DIR RELTOK+ "[" node "]"
    DIR      := "->" | "<-"        (or the Unicode arrows when requested)
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Entity, InputGraph, RelationType
from .errors import (
    LinearizationError,
    ParseError,
    UnbalancedBrackets,
    UnknownEntity,
    UnknownRelation,
)
from .planlib import Direction, PlanEdge, PlanNode, SentencePlan, TextPlan, check_matching

SENTENCE_SEP = "."
ARROWS = {"->": Direction.FORWARD, "<-": Direction.REVERSE, "→": Direction.FORWARD, "←": Direction.REVERSE}
_UNICODE = {Direction.FORWARD: "→", Direction.REVERSE: "←"}
_RESERVED = ("[", "]", "->", "<-", "→", "←")


@dataclass(frozen=True)
class LinearPlan:
    tokens: tuple[str, ...]
    sentence_boundaries: tuple[int, ...]  # start index of each sentence


def _entity_token(entity: Entity) -> str:
    tok = entity.token
    if any(r in tok for r in _RESERVED) or tok == SENTENCE_SEP:
        raise LinearizationError(f"entity {entity.id!r} contains a reserved token")
    return tok


def _node_tokens(node: PlanNode, unicode: bool, out: list[str]) -> None:
    out.append(_entity_token(node.entity))
    for e in node.children:
        out.append(_UNICODE[e.direction] if unicode else e.direction.arrow)
        out.extend(e.relation.tokens)
        out.append("[")
        _node_tokens(e.child, unicode, out)
        out.append("]")


def linear_tokens(plan: TextPlan | SentencePlan, unicode: bool = False) -> LinearPlan:
    sentences = plan.sentences if isinstance(plan, TextPlan) else (plan,)
    toks: list[str] = []
    starts = []
    for i, s in enumerate(sentences):
        if i:
            toks.append(SENTENCE_SEP)
        starts.append(len(toks))
        _node_tokens(s.root, unicode, toks)
    return LinearPlan(tuple(toks), tuple(starts))


def linearize_sentence_plan(plan: SentencePlan, unicode: bool = False) -> str:
    return " ".join(linear_tokens(plan, unicode).tokens)


def linearize_text_plan(plan: TextPlan, unicode: bool = False) -> str:
    return f" {SENTENCE_SEP} ".join(linearize_sentence_plan(s, unicode) for s in plan.sentences)


class _Parser:
    def __init__(self, tokens: list[str], graph: InputGraph):
        self.toks = tokens
        self.pos = 0
        self.entities = {e.token: e for e in graph.entities}
        self.by_tokens: dict[tuple[str, ...], list[RelationType]] = {}
        for r in graph.relations:
            self.by_tokens.setdefault(r.tokens, []).append(r)
        self.triples = set(graph.triples)

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def entity(self) -> Entity:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected an entity, found end of input", self.pos)
        if tok in ("[", "]") or tok in ARROWS:
            raise ParseError(f"expected an entity, found {tok!r}", self.pos)
        if tok not in self.entities:
            raise UnknownEntity(f"unknown entity {tok!r}", self.pos)
        self.pos += 1
        return self.entities[tok]

    def node(self, depth: int) -> PlanNode:
        head = self.entity()
        edges = []
        while self.peek() in ARROWS:
            direction = ARROWS[self.toks[self.pos]]
            self.pos += 1
            start = self.pos
            rel_toks = []
            while self.peek() is not None and self.peek() != "[":
                if self.peek() == "]" or self.peek() in ARROWS:
                    raise ParseError(f"unexpected {self.peek()!r} in relation", self.pos)
                rel_toks.append(self.toks[self.pos])
                self.pos += 1
            if self.peek() is None:
                raise UnbalancedBrackets("relation not followed by '['", self.pos)
            if not rel_toks:
                raise ParseError("missing relation tokens", start)
            candidates = self.by_tokens.get(tuple(rel_toks))
            if not candidates:
                raise UnknownRelation(f"unknown relation {' '.join(rel_toks)!r}", start)
            self.pos += 1  # "["
            child = self.node(depth + 1)
            if self.peek() != "]":
                raise UnbalancedBrackets("expected ']'", self.pos)
            self.pos += 1
            # several graph relations may share a token split; take the first
            # declared one that forms a real triple here
            chosen = next(
                (r for r in candidates if PlanEdge(r, direction, child).triple(head) in self.triples),
                candidates[0],
            )
            edges.append(PlanEdge(chosen, direction, child))
        return PlanNode(head, tuple(edges))

    def plan(self) -> list[SentencePlan]:
        sentences = [SentencePlan(self.node(0))]
        while self.peek() == SENTENCE_SEP:
            self.pos += 1
            sentences.append(SentencePlan(self.node(0)))
        if self.peek() is not None:
            tok = self.peek()
            if tok == "]":
                raise UnbalancedBrackets("unmatched ']'", self.pos)
            raise ParseError(f"unexpected token {tok!r}", self.pos)
        return sentences


def parse_linearized(text: str, graph: InputGraph) -> TextPlan:
    """Parse a linearized plan against ``graph``; the result must express
    every triple of the graph exactly once (MatchingError otherwise)."""
    tokens = text.split()
    if not tokens:
        raise ParseError("empty plan", 0)
    if tokens.count("[") != tokens.count("]"):
        raise UnbalancedBrackets("bracket counts differ")
    plan = TextPlan(tuple(_Parser(tokens, graph).plan()), graph)
    check_matching(plan, graph)
    return plan
