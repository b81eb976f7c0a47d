"""Show the variety inside the top-ranked plans of one input.

Trains on a corpus (the toy corpus by default), ranks every plan of one
entry, and prints every k-th plan of the top 10% with its template
realization.

    python scripts/diversity_demo.py --eid Id4 --show 5
"""
import argparse
from pathlib import Path

from textplan.experiments import train_on
from textplan.linearizer import linearize_text_plan
from textplan.realizer import realize_text_plan
from textplan.scorer import rank_plans, top_count

TOY = Path(__file__).resolve().parent.parent / "tests" / "data" / "toy_webnlg.xml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default=str(TOY), help="WebNLG XML file or directory")
    ap.add_argument("--eid", default="Id4")
    ap.add_argument("--percent", type=float, default=10.0)
    ap.add_argument("--show", type=int, default=5, help="number of plans to print")
    args = ap.parse_args()

    run = train_on(args.corpus, workers=1)
    entry = next(e for e in run.entries if e.eid == args.eid)
    ranked = rank_plans(run.model, entry.graph)
    top = top_count(len(ranked), args.percent)
    step = max(1, top // args.show)
    print(f"{entry.eid}: {len(ranked)} plans, top {args.percent:g}% = {top}")
    for rank in range(0, top, step)[: args.show]:
        plan, score = ranked[rank]
        print(f"\n#{rank}  log-score {score.total:.3f}")
        print("  ", linearize_text_plan(plan))
        print("  ", realize_text_plan(plan, run.bank))


if __name__ == "__main__":
    main()
