import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from textplan.corpus import InputGraph, Triple, load_webnlg

DATA = Path(__file__).parent / "data"
TOY_XML = DATA / "toy_webnlg.xml"

ENTITY_POOL = ["A", "B", "C", "D", "E"]
RELATION_POOL = ["r", "s", "hasPart"]


def graph(*triples: str) -> InputGraph:
    """graph("A | r | B", ...)"""
    return InputGraph.from_lines(triples)


def random_graph(rng: random.Random, max_triples: int, entities=ENTITY_POOL, relations=RELATION_POOL) -> InputGraph:
    n = rng.randint(1, max_triples)
    triples: list[Triple] = []
    while len(triples) < n:
        s, o = rng.sample(entities, 2)
        t = Triple.of(s, rng.choice(relations), o)
        if t not in triples:
            triples.append(t)
    return InputGraph(tuple(triples))


@st.composite
def graphs(draw, max_triples=4, entities=ENTITY_POOL, relations=RELATION_POOL):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(random.Random(seed), draw(st.integers(1, max_triples)), entities, relations)


@pytest.fixture(scope="session")
def toy_entries():
    return load_webnlg(TOY_XML)


@pytest.fixture
def john():
    return graph("John | birthPlace | London", "John | employer | IBM")


# -- acceptance summary ---------------------------------------------------------
# test_acceptance.py records one verdict per criterion here; the lines are
# printed at the end of the run.

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
