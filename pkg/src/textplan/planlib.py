"""Text-plan structures and exhaustive plan enumeration.

A text plan is a sequence of sentence plans.  A sentence plan is an ordered
tree over entities whose edges carry a relation and the direction in which
that relation is expressed.  Enumeration walks every ordered split of the
triples into sentences and every rooted, child-ordered arrangement of each
sentence's triples.
"""
from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .corpus import Entity, InputGraph, RelationType, Triple
from .errors import MatchingError, NoPlans, NotATree, TooLarge

MAX_TRIPLES = 7
MAX_PLANS = 1_000_000


class Direction(str, enum.Enum):
    FORWARD = "fwd"
    REVERSE = "rev"

    @property
    def arrow(self) -> str:
        return "->" if self is Direction.FORWARD else "<-"


@dataclass(frozen=True)
class PlanNode:
    entity: Entity
    children: tuple["PlanEdge", ...] = ()


@dataclass(frozen=True)
class PlanEdge:
    relation: RelationType
    direction: Direction
    child: PlanNode

    def triple(self, head: Entity) -> Triple:
        """The graph triple this edge expresses when hung below ``head``."""
        if self.direction is Direction.FORWARD:
            return Triple(head, self.relation, self.child.entity)
        return Triple(self.child.entity, self.relation, head)


@dataclass(frozen=True)
class SentencePlan:
    root: PlanNode

    def entities(self) -> list[Entity]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node.entity)
            stack.extend(e.child for e in reversed(node.children))
        return out

    def edges(self) -> list[tuple[Entity, PlanEdge]]:
        """(head, edge) pairs in pre-order."""
        out = []

        def walk(node):
            for e in node.children:
                out.append((node.entity, e))
                walk(e.child)

        walk(self.root)
        return out

    def triples(self) -> list[Triple]:
        return [e.triple(h) for h, e in self.edges()]

    def relations(self) -> list[RelationType]:
        return [e.relation for _, e in self.edges()]

    def __len__(self):
        return len(self.edges())


@dataclass(frozen=True)
class TextPlan:
    sentences: tuple[SentencePlan, ...]
    source: InputGraph | None = field(default=None, compare=False, repr=False)

    def entities(self) -> list[Entity]:
        return [ent for s in self.sentences for ent in s.entities()]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sentences)

    def edges(self) -> list[tuple[Entity, PlanEdge]]:
        return [he for s in self.sentences for he in s.edges()]

    def n_reversed(self) -> int:
        return sum(e.direction is Direction.REVERSE for _, e in self.edges())


def plan_entity_sequence(plan: SentencePlan | TextPlan) -> list[Entity]:
    return plan.entities()


def check_matching(plan: TextPlan, graph: InputGraph) -> None:
    """Raise MatchingError unless every triple of ``graph`` is expressed exactly once."""
    expressed = [t for s in plan.sentences for t in s.triples()]
    wanted = set(graph.triples)
    extra = [t for t in expressed if t not in wanted]
    if extra:
        raise MatchingError(f"plan expresses triples not in the graph: {extra[0]}")
    if len(expressed) != len(set(expressed)):
        raise MatchingError("plan expresses a triple more than once")
    missing = wanted - set(expressed)
    if missing:
        raise MatchingError(f"{len(missing)} triple(s) not expressed, e.g. {next(iter(missing))}")
    for s in plan.sentences:
        ents = s.entities()
        if len(ents) != len(set(ents)):
            raise MatchingError("entity repeated within a sentence plan")


# -- partitions ---------------------------------------------------------------

def _set_partitions(items: Sequence[int], k: int) -> Iterator[list[list[int]]]:
    """Unordered partitions of ``items`` into exactly k blocks (restricted growth order)."""
    n = len(items)
    if k == 0:
        if n == 0:
            yield []
        return
    if n < k:
        return
    first, rest = items[0], items[1:]
    # first element alone
    for p in _set_partitions(rest, k - 1):
        yield [[first]] + p
    # first element joins a block of a k-partition of the rest
    for p in _set_partitions(rest, k):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def ordered_partitions(n: int, k: int | None = None) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Ordered set partitions of range(n), as tuples of sorted index tuples.

    Order: number of blocks ascending; within a block count, canonical
    partitions (blocks sorted by smallest member) in lexicographic order; then
    block permutations in lexicographic permutation order.
    """
    counts = [k] if k is not None else range(1, n + 1)
    for kk in counts:
        canon = sorted(
            tuple(sorted(tuple(sorted(b)) for b in p))
            for p in _set_partitions(list(range(n)), kk)
        )
        for p in canon:
            yield from itertools.permutations(p)


def enumerate_ordered_partitions(
    graph: InputGraph, max_triples: int = MAX_TRIPLES
) -> Iterator[list[tuple[Triple, ...]]]:
    n = len(graph.triples)
    if n > max_triples:
        raise TooLarge(f"{n} triples exceeds the limit of {max_triples}")
    for part in ordered_partitions(n):
        yield [tuple(graph.triples[i] for i in block) for block in part]


# -- sentence trees ---------------------------------------------------------

class TreeCheck(str, enum.Enum):
    TREE = "tree"
    CYCLIC = "cyclic"
    DISCONNECTED = "disconnected"
    MULTI_EDGE = "multi-edge"


def subset_tree_check(subset: Iterable[Triple]) -> TreeCheck:
    subset = list(subset)
    pairs = [frozenset((t.subject, t.object)) for t in subset]
    if len(set(pairs)) != len(pairs):
        return TreeCheck.MULTI_EDGE
    parent: dict[Entity, Entity] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in subset:
        a, b = find(t.subject), find(t.object)
        if a == b:
            return TreeCheck.CYCLIC
        parent[a] = b
    roots = {find(x) for x in list(parent)}
    return TreeCheck.TREE if len(roots) == 1 else TreeCheck.DISCONNECTED


def _subset_entities(subset: Sequence[Triple]) -> list[Entity]:
    seen: dict[Entity, None] = {}
    for t in subset:
        seen.setdefault(t.subject)
        seen.setdefault(t.object)
    return list(seen)


def enumerate_sentence_plans(subset: Sequence[Triple]) -> list[SentencePlan]:
    """All rooted ordered trees over a tree-shaped triple subset.

    Roots follow first-appearance entity order within ``subset``; below a
    root, each node's children are permuted in lexicographic order of their
    triple positions.
    """
    subset = list(subset)
    if not subset:
        raise NotATree("empty subset")
    check = subset_tree_check(subset)
    if check is not TreeCheck.TREE:
        raise NotATree(f"subset is {check.value}")

    adj: dict[Entity, list[tuple[Triple, Entity]]] = defaultdict(list)
    for t in subset:
        adj[t.subject].append((t, t.object))
        adj[t.object].append((t, t.subject))

    def variants(node: Entity, via: Triple | None) -> list[PlanNode]:
        kids = [(t, other) for t, other in adj[node] if t != via]
        sub = {t: variants(other, t) for t, other in kids}
        out = []
        for perm in itertools.permutations(kids):
            for combo in itertools.product(*(sub[t] for t, _ in perm)):
                edges = tuple(
                    PlanEdge(
                        t.relation,
                        Direction.FORWARD if t.subject == node else Direction.REVERSE,
                        child,
                    )
                    for (t, _), child in zip(perm, combo)
                )
                out.append(PlanNode(node, edges))
        return out

    return [SentencePlan(root) for ent in _subset_entities(subset) for root in variants(ent, None)]


def count_sentence_plans(subset: Sequence[Triple]) -> int:
    """Closed form: sum over roots of the product of (child count)! over nodes."""
    from math import factorial

    degree: dict[Entity, int] = defaultdict(int)
    for t in subset:
        degree[t.subject] += 1
        degree[t.object] += 1
    total = 0
    for root in degree:
        prod = 1
        for node, d in degree.items():
            prod *= factorial(d if node == root else d - 1)
        total += prod
    return total


class _SubsetCache:
    """Memoises sentence plans per triple subset (subsets recur across partitions)."""

    def __init__(self):
        self._plans: dict[tuple[Triple, ...], list[SentencePlan] | None] = {}

    def get(self, subset: tuple[Triple, ...]) -> list[SentencePlan] | None:
        if subset not in self._plans:
            ok = subset_tree_check(subset) is TreeCheck.TREE
            self._plans[subset] = enumerate_sentence_plans(subset) if ok else None
        return self._plans[subset]


def enumerate_text_plans(
    graph: InputGraph,
    limit: int | None = None,
    max_triples: int = MAX_TRIPLES,
) -> Iterator[TextPlan]:
    """Stream every text plan of ``graph`` in deterministic order.

    Ordered partitions whose blocks are not all trees are skipped.  Raises
    NoPlans when nothing can be produced.
    """
    if not graph.triples:
        raise NoPlans("empty graph")
    cache = _SubsetCache()
    produced = 0
    for blocks in enumerate_ordered_partitions(graph, max_triples):
        options = [cache.get(b) for b in blocks]
        if any(o is None for o in options):
            continue
        for combo in itertools.product(*options):
            if limit is not None and produced >= limit:
                return
            produced += 1
            yield TextPlan(tuple(combo), graph)
    if produced == 0:
        raise NoPlans("every grouping of the input contains a cycle or parallel edge")


# -- JSON ---------------------------------------------------------------------

def node_to_json(node: PlanNode) -> dict:
    return {
        "entity": node.entity.raw_form,
        "children": [
            {"relation": e.relation.id, "direction": e.direction.value, "child": node_to_json(e.child)}
            for e in node.children
        ],
    }


def node_from_json(obj: dict) -> PlanNode:
    return PlanNode(
        Entity.from_raw(obj["entity"]),
        tuple(
            PlanEdge(RelationType(c["relation"]), Direction(c["direction"]), node_from_json(c["child"]))
            for c in obj.get("children", [])
        ),
    )


def plan_to_json(plan: TextPlan) -> dict:
    return {"sentences": [{"root": node_to_json(s.root)} for s in plan.sentences]}


def plan_from_json(obj: dict, graph: InputGraph | None = None) -> TextPlan:
    """Rebuild a plan.  Without ``graph`` the source graph is recovered from the edges."""
    sentences = tuple(SentencePlan(node_from_json(s["root"])) for s in obj["sentences"])
    if graph is None:
        graph = InputGraph(tuple(t for s in sentences for t in s.triples()))
    plan = TextPlan(sentences, graph)
    check_matching(plan, graph)
    return plan
