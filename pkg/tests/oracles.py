"""Independent oracles shared by the unit and acceptance suites."""
import itertools
import json

from textplan.corpus import InputGraph
from textplan.planlib import Direction, PlanEdge, PlanNode, SentencePlan, TextPlan, plan_to_json


def key(plan: TextPlan) -> str:
    return json.dumps(plan_to_json(plan), sort_keys=True)


# -- brute-force oracle ------------------------------------------------------
# Every text plan is a sequence of sentences, each a pre-order listing of
# oriented edges.  Enumerate all triple permutations, all break positions and
# all orientations, keep the sequences that form valid trees, and dedupe.

def _sentence_from_sequence(oriented):
    """oriented: list of (head, relation, child, direction) in pre-order.
    Returns a SentencePlan or None if the sequence is not a pre-order tree."""
    root = oriented[0][0]
    children = {root: []}
    path = [root]
    for head, rel, child, d in oriented:
        if child in children or head not in path:
            return None
        # pre-order: the head must be on the path from the root to the last node
        path = path[: path.index(head) + 1] + [child]
        children[head].append((rel, d, child))
        children[child] = []

    def build(e):
        return PlanNode(e, tuple(PlanEdge(r, d, build(c)) for r, d, c in children[e]))

    return SentencePlan(build(root))


def oracle_plans(g: InputGraph) -> set[str]:
    triples = g.triples
    n = len(triples)
    out = set()
    for perm in itertools.permutations(triples):
        for breaks in itertools.product((False, True), repeat=n - 1):
            groups, cur = [], [perm[0]]
            for t, b in zip(perm[1:], breaks):
                if b:
                    groups.append(cur)
                    cur = []
                cur.append(t)
            groups.append(cur)
            for orient in itertools.product((Direction.FORWARD, Direction.REVERSE), repeat=n):
                it = iter(orient)
                sentences = []
                for grp in groups:
                    seq = []
                    for t in grp:
                        d = next(it)
                        if d is Direction.FORWARD:
                            seq.append((t.subject, t.relation, t.object, d))
                        else:
                            seq.append((t.object, t.relation, t.subject, d))
                    sp = _sentence_from_sequence(seq)
                    if sp is None:
                        break
                    sentences.append(sp)
                else:
                    out.add(key(TextPlan(tuple(sentences), g)))
    return out
