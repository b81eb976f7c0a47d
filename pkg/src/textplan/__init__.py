"""Symbolic text planning for RDF-to-text generation.

Enumerate every text plan of a small RDF graph, match reference texts to
consistent plans, rank plans with a product of count-based experts, and
linearize or template-realize the chosen ones.
"""
from .corpus import DatasetEntry, Entity, InputGraph, RelationType, Triple, load_corpus, load_webnlg
from .errors import TextPlanError
from .evaluation import check_consistency, consistency_table, corpus_bleu
from .linearizer import linearize_text_plan, parse_linearized
from .matcher import build_matched_corpus, match_reference, recognize_entities
from .planlib import Direction, PlanEdge, PlanNode, SentencePlan, TextPlan, enumerate_text_plans
from .realizer import TemplateBank, realize_sentence_plan, realize_text_plan
from .scorer import ScoringModel, Selection, fit, rank_plans, score_plan

__version__ = "0.1.0"

__all__ = [
    "DatasetEntry", "Entity", "InputGraph", "RelationType", "Triple", "load_corpus", "load_webnlg",
    "TextPlanError",
    "check_consistency", "consistency_table", "corpus_bleu",
    "linearize_text_plan", "parse_linearized",
    "build_matched_corpus", "match_reference", "recognize_entities",
    "Direction", "PlanEdge", "PlanNode", "SentencePlan", "TextPlan", "enumerate_text_plans",
    "TemplateBank", "realize_sentence_plan", "realize_text_plan",
    "ScoringModel", "Selection", "fit", "rank_plans", "score_plan",
]
