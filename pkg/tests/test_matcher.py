import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import graph, random_graph
from textplan.corpus import DatasetEntry, Entity, RelationType, Triple
from textplan.linearizer import linearize_text_plan
from textplan.matcher import (
    MatchReport,
    build_matched_corpus,
    find_dates,
    is_consistent,
    levenshtein,
    load_matched,
    match_reference,
    match_reference_detailed,
    potentially_consistent,
    recognize_entities,
    save_matched,
    similarity,
    split_sentences,
)
from textplan.planlib import check_matching, enumerate_text_plans
from textplan.realizer import realize_sentence_plan

E = Entity


# -- sentence splitting ------------------------------------------------------

@pytest.mark.parametrize(
    "text, n",
    [
        ("John works for IBM. John was born in London.", 2),
        ("Hello world", 1),
        ("He retired on Sept. 1st. He was born in 1933.", 2),
        ("Mr. Smith lives in St. Louis. He works there.", 2),
        ("A.T. Charlie Johnson is the editor. He lives in the U.S. today.", 2),
        ('He said "Stop. Go." Then he left.', 2),
        ("It is 3.5 km long. Really!", 2),
        ("it ended. then more", 1),
    ],
)
def test_split_sentences(text, n):
    split = split_sentences(text)
    assert len(split.sentences) == n
    for s, (a, b) in zip(split.sentences, split.offsets):
        assert text[a:b] == s
    assert " ".join(split.sentences).split() == text.split()


@given(st.text(alphabet="abcXY .!?\"'", min_size=1, max_size=60).filter(lambda s: s.strip()))
def test_split_reconstructs_text(text):
    split = split_sentences(text)
    assert "".join(split.sentences).replace(" ", "") == text.replace(" ", "").strip() or len(split.sentences) == 1


# -- fuzzy matching ------------------------------------------------------------

def test_levenshtein_against_naive_recursion():
    def naive(a, b):
        if not a or not b:
            return len(a) + len(b)
        return min(naive(a[1:], b) + 1, naive(a, b[1:]) + 1, naive(a[1:], b[1:]) + (a[0] != b[0]))

    rng = random.Random(5)
    for _ in range(200):
        a = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
        b = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
        assert levenshtein(a, b) == naive(a, b)


def test_similarity_digits_exact():
    assert similarity("2158-3226", "2158-3226") == 1.0
    assert similarity("1963", "1964") == 0.0
    assert similarity("fylde", "fylde") == 1.0


def test_afc_fylde_variant():
    ms = recognize_entities("AFC Fylde won", [E("A.F.C_Fylde")])
    assert [m.entity for m in ms] == [E("A.F.C_Fylde")]


def test_tories_need_external_knowledge():
    assert recognize_entities("the Tories won", [E("UK_conservative_party")]) == []


def test_date_expression():
    g = graph('William_Anders | birthDate | "1933-10-17"')
    ms = recognize_entities("He was born on October 17th, 1933", g)
    assert [m.entity.id for m in ms] == ["1933-10-17"]
    for text in ("born 17 October 1933", "born 1933-10-17", "born Oct. 17, 1933"):
        assert len(recognize_entities(text, g)) == 1, text
    assert recognize_entities("born October 18th, 1933", g) == []


def test_find_dates_forms():
    found = {(y, m, d) for _, _, y, m, d in find_dates("On July 4th, 1776 and 1 September 1969, in 1963")}
    assert {(1776, 7, 4), (1969, 9, 1), (1963, None, None)} <= found


def test_mentions_in_text_order_and_disjoint():
    g = graph("John | birthPlace | London", "John | employer | IBM")
    ms = recognize_entities("IBM employs John, who was born in London.", g)
    assert [m.entity.id for m in ms] == ["IBM", "John", "London"]
    spans = [m.token_span for m in ms]
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


def test_longest_span_wins():
    ents = [E("New_York"), E("New_York_City")]
    ms = recognize_entities("She moved to New York City.", ents)
    assert [m.entity.id for m in ms] == ["New_York_City"]


# -- consistency ------------------------------------------------------------------

JOHN, IBM, LONDON = E("John"), E("IBM"), E("London")
EMP = Triple(JOHN, RelationType("employer"), IBM)


def test_potentially_consistent():
    assert potentially_consistent([EMP], [JOHN, IBM])
    assert not potentially_consistent([EMP], [LONDON])
    assert not potentially_consistent([EMP], [JOHN, IBM, LONDON])


def _sentence(root_first):
    g = graph("John | residence | London", "John | employer | IBM")
    for p in enumerate_text_plans(g):
        if len(p.sentences) == 1 and [e.id for e in p.sentences[0].entities()] == root_first:
            return p.sentences[0]
    raise AssertionError(root_first)


def test_is_consistent_cases():
    sp = _sentence(["John", "London", "IBM"])
    assert is_consistent([JOHN, LONDON, IBM], sp, set())
    assert is_consistent([JOHN, IBM], sp, {LONDON})
    assert not is_consistent([JOHN, IBM], sp, set())
    assert not is_consistent([IBM, JOHN], sp, {LONDON})


@given(st.sets(st.sampled_from(["John", "London", "IBM", "Paris"])))
def test_is_consistent_monotone_in_prior(extra):
    sp = _sentence(["John", "London", "IBM"])
    for se in ([JOHN, IBM], [JOHN], [LONDON, IBM], [IBM, JOHN]):
        if is_consistent(se, sp, set()):
            assert is_consistent(se, sp, {E(x) for x in extra})


# -- match_reference -----------------------------------------------------------------

def test_example_two_sentence_plan(john):
    plans = match_reference(john, "John works for IBM. John was born in London.")
    lins = {linearize_text_plan(p) for p in plans}
    assert "John -> employer [ IBM ] . John -> birth place [ London ]" in lins


def test_example_reverse_root(john):
    plans = match_reference(john, "London is the birthplace of John, who works for IBM.")
    lins = {linearize_text_plan(p) for p in plans}
    assert "London <- birth place [ John -> employer [ IBM ] ]" in lins


def test_unmentioned_entity_unmatched(john):
    assert match_reference(john, "John works for IBM.") == []


def test_aip_reference():
    g = graph(
        "AIP_Advances | editor | A.T._Charlie_Johnson",
        "A.T._Charlie_Johnson | almaMater | Harvard_University",
        'AIP_Advances | ISSN_number | "2158-3226"',
        "A.T._Charlie_Johnson | residence | United_States",
    )
    ref = ("A.T. Charlie Johnson is the editor of AIP Advances which has the ISSN number 2158-3226. "
           "A.T. Charlie Johnson lives in the United States and graduated from Harvard University.")
    lins = {linearize_text_plan(p) for p in match_reference(g, ref)}
    assert ("A.T._Charlie_Johnson <- editor [ AIP_Advances -> issn number [ 2158-3226 ] ] . "
            "A.T._Charlie_Johnson -> residence [ United_States ] -> alma mater [ Harvard_University ]") in lins


def _independently_consistent(plan, split, mentions):
    prior = set()
    for sp, ms in zip(plan.sentences, mentions):
        if not is_consistent([m.entity for m in ms], sp, prior):
            return False
        prior.update(sp.entities())
    return len(plan.sentences) == len(split.sentences)


def test_soundness_on_toy(toy_entries):
    for e in toy_entries:
        for ref in e.references:
            res = match_reference_detailed(e.graph, ref)
            for p in res.plans:
                check_matching(p, e.graph)
                assert _independently_consistent(p, res.split, res.mentions)


WORDS = ["Alpha", "Bravo", "Charlie", "Delta", "Echo"]
RELS = ["owner", "partOf", "leaderName"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_completeness_on_literal_references(seed):
    """References generated from a known plan with literal entity strings are
    matched back to (at least) that plan."""
    rng = random.Random(seed)
    g = random_graph(rng, 3, WORDS, RELS)
    plans = list(enumerate_text_plans(g))
    plan = rng.choice(plans)
    ref = " ".join(realize_sentence_plan(s) for s in plan.sentences)
    found = {linearize_text_plan(p) for p in match_reference(g, ref)}
    assert linearize_text_plan(plan) in found


def test_build_matched_corpus_report(toy_entries):
    examples, report = build_matched_corpus(toy_entries)
    assert report.pairs == 18
    assert 0 < report.matched <= report.pairs
    assert report.examples == len(examples) == sum(k * v for k, v in report.histogram.items())
    assert sum(report.histogram.values()) == report.pairs
    assert all(ex.plan_rank < ex.n_consistent for ex in examples)
    # parallel construction merges in input order
    par, _ = build_matched_corpus(toy_entries, workers=2)
    assert [linearize_text_plan(x.plan) for x in par] == [linearize_text_plan(x.plan) for x in examples]


def test_report_edge_cases(john):
    assert build_matched_corpus([])[1].rate is None
    e = DatasetEntry(john, ("John works for IBM. John was born in London.",) * 4)
    assert build_matched_corpus([e])[1].rate == 1.0
    assert MatchReport(pairs=18102, matched=13828).rate == pytest.approx(0.764, abs=5e-4)


def test_matched_round_trip(toy_entries):
    examples, _ = build_matched_corpus(toy_entries)
    back = load_matched(save_matched(examples))
    assert len(back) == len(examples)
    for a, b in zip(examples, back):
        assert (a.eid, a.reference, a.plan_rank, a.n_consistent) == (b.eid, b.reference, b.plan_rank, b.n_consistent)
        assert linearize_text_plan(a.plan) == linearize_text_plan(b.plan)
        assert set(a.graph.triples) == set(b.graph.triples)
