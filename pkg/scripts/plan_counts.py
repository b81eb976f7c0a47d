"""Plan-space sizes and ranking time for star and chain graphs of 1..7 triples."""
import argparse
import time

from textplan.corpus import InputGraph
from textplan.scorer import ScoringModel, rank_plans


def star(k):
    return InputGraph.from_lines([f"C | r{i} | X{i}" for i in range(k)])


def chain(k):
    return InputGraph.from_lines([f"X{i} | r{i} | X{i + 1}" for i in range(k)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max", type=int, default=6, help="largest graph size (7 needs ~2 GB and a minute)")
    args = ap.parse_args()
    model = ScoringModel(dir_counts={f"r{i}": [3, 1] for i in range(8)})
    print(f"{'shape':6} {'n':>2} {'plans':>10} {'rank s':>8}")
    for name, make in (("star", star), ("chain", chain)):
        for k in range(1, args.max + 1):
            t0 = time.perf_counter()
            ranked = rank_plans(model, make(k))
            ranked[0]
            print(f"{name:6} {k:>2} {len(ranked):>10} {time.perf_counter() - t0:>8.2f}")


if __name__ == "__main__":
    main()
