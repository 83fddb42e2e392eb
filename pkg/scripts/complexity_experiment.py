"""Nodes visited by the level-overlap walk versus word length, for |A| = 2, 3, 4.

Writes a CSV with the visited-node count next to the |A|^(k+1) and |A|^(2k)
reference curves, plus wall-clock time per row.
"""

import argparse
import time

import numpy as np

from ckabs import io
from ckabs.ck import level_overlap
from ckabs.experiments import labelled_random_chain


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kmax", type=int, default=15)
    parser.add_argument("--states", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-words", type=int, default=3 ** 13,
                        help="skip (|A|, k) once |A|**k exceeds this")
    parser.add_argument("--out", default="complexity.csv")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for q in (2, 3, 4):
        c1 = labelled_random_chain(rng, args.states, q)
        c2 = labelled_random_chain(rng, args.states, q)
        for k in range(1, args.kmax + 1):
            if q ** k > args.max_words:
                break
            start = time.perf_counter()
            nodes = level_overlap(c1, c2, k).nodes_visited
            elapsed = time.perf_counter() - start
            rows.append((q, k, nodes, q ** (k + 1), q ** (2 * k), round(elapsed, 4)))
            print(f"|A|={q} k={k:2d} nodes={nodes:>9d} {elapsed:.3f}s")
    io.write_csv(args.out, ["alphabet_size", "k", "nodes_visited", "A_pow_k_plus_1", "A_pow_2k",
                            "seconds"], rows, f"config {vars(args)}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
