"""Corpus-level replication on the WebNLG 2017 release.

Trains on the training split, then reports
  * the training-set match rate and matched-pair count,
  * p_dir for the "manager" relation (both directions),
  * the random-top-10% diversity protocol on the seen test inputs.

    python scripts/replicate_webnlg.py --train webnlg/train --test webnlg/test/testdata_with_lex.xml --out results.json
"""
import argparse
import json
import time
from pathlib import Path

from textplan.corpus import load_webnlg
from textplan.experiments import direction_probability, diversity_protocol, seen_entries, train_on


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--train", required=True, help="training XML file or directory")
    ap.add_argument("--test", help="test XML file or directory (enables the diversity protocol)")
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--percent", type=float, default=10.0)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", help="write the results JSON here")
    args = ap.parse_args()

    t0 = time.perf_counter()
    run = train_on(args.train, workers=args.workers)
    results = {
        "match": run.report.to_json(),
        "p_dir_manager": direction_probability(run.model, "manager"),
        "train_seconds": round(time.perf_counter() - t0, 1),
        "templates": len(run.bank.templates),
    }
    print(json.dumps(results["match"]))
    print("p_dir(. | manager):", results["p_dir_manager"])

    if args.test:
        seen = seen_entries(load_webnlg(args.test), run.entries)
        t0 = time.perf_counter()
        runs = diversity_protocol(run.model, run.bank, seen, tuple(args.seeds), args.percent)
        results["diversity"] = {
            "inputs": len(seen),
            "seconds": round(time.perf_counter() - t0, 1),
            "runs": [
                {"seed": r.seed, "bleu": r.bleu, "errors": r.errors, "all_in_top": r.all_in_top}
                for r in runs
            ],
        }
        for r in runs:
            print(f"seed {r.seed}: BLEU {r.bleu:.2f}, errors {len(r.errors)}, in top {args.percent:g}%: {r.all_in_top}")

    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=1))


if __name__ == "__main__":
    main()
