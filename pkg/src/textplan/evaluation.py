"""Plan/realization consistency metrics and corpus BLEU."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import Empty, LengthMismatch
from .matcher import MATCH_THRESHOLD, MatchReport, recognize_entities
from .planlib import SentencePlan


@dataclass(frozen=True)
class ConsistencyResult:
    all_entities: bool
    order_ok: bool | None = None  # only defined when all_entities


def check_consistency(plan: SentencePlan, text: str, threshold: float = MATCH_THRESHOLD) -> ConsistencyResult:
    """Are all plan entities mentioned in ``text``, and in plan order?"""
    wanted = plan.entities()
    found = [m.entity for m in recognize_entities(text, wanted, threshold)]
    if set(found) != set(wanted):
        return ConsistencyResult(False, None)
    return ConsistencyResult(True, found == wanted)


@dataclass(frozen=True)
class ConsistencyTable:
    n: int
    n_complete: int
    n_ordered: int

    @property
    def entity_rate(self) -> float:
        return float(Fraction(self.n_complete, self.n))

    @property
    def order_rate(self) -> float:
        # conditional on full entity coverage; 0.0 when nothing was complete
        return float(Fraction(self.n_ordered, self.n_complete)) if self.n_complete else 0.0

    def to_json(self) -> dict:
        return {"entity_rate": self.entity_rate, "order_rate": self.order_rate, "n": self.n}


def consistency_table(pairs: Iterable[tuple[SentencePlan, str]], threshold: float = MATCH_THRESHOLD) -> ConsistencyTable:
    n = complete = ordered = 0
    for plan, text in pairs:
        res = check_consistency(plan, text, threshold)
        n += 1
        if res.all_entities:
            complete += 1
            ordered += bool(res.order_ok)
    if n == 0:
        raise Empty("no (plan, text) pairs")
    return ConsistencyTable(n, complete, ordered)


# -- BLEU ---------------------------------------------------------------------

_BLEU_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def bleu_tokenize(text: str) -> list[str]:
    """Lower-case and split on whitespace and punctuation."""
    return _BLEU_TOKEN_RE.findall(text.lower())


def _ngrams(toks: Sequence[str], n: int) -> Counter:
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def corpus_bleu(hypotheses: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Corpus-level BLEU in [0, 100]: clipped n-gram precisions for n = 1..4,
    geometric mean, brevity penalty against the closest reference length.
    No smoothing."""
    if len(hypotheses) != len(references):
        raise LengthMismatch(f"{len(hypotheses)} hypotheses vs {len(references)} reference sets")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, refs in zip(hypotheses, references):
        h = bleu_tokenize(hyp)
        rs = [bleu_tokenize(r) for r in refs]
        if not rs:
            raise LengthMismatch("hypothesis without references")
        hyp_len += len(h)
        ref_len += min((abs(len(r) - len(h)), len(r)) for r in rs)[1]
        for n in range(1, max_n + 1):
            hc = _ngrams(h, n)
            max_ref: Counter = Counter()
            for r in rs:
                max_ref |= _ngrams(r, n)
            matches[n - 1] += sum(min(c, max_ref[g]) for g, c in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)
    if hyp_len == 0 or any(m == 0 for m in matches):
        return 0.0
    log_prec = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_prec)


def match_report(report: MatchReport) -> str:
    rate = "n/a" if report.rate is None else f"{report.rate:.3f}"
    lines = [
        f"pairs:    {report.pairs}",
        f"matched:  {report.matched}",
        f"rate:     {rate}",
        f"examples: {report.examples}",
        "consistent plans per reference:",
    ]
    for k, v in sorted(report.histogram.items()):
        lines.append(f"  {k:>6}: {v}")
    return "\n".join(lines)
