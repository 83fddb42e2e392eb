"""Run the greedy refinement on the Lorentz benchmark and show each round."""

import argparse

from ckabs import io
from ckabs.dynamics import make_lorentz_system
from ckabs.estimation import EstimationConfig
from ckabs.refine import ck_metric, refine


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iters", type=int, default=6)
    parser.add_argument("--samples", type=int, default=50_000)
    parser.add_argument("--epsilon", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sampling", choices=["candidate", "iteration"], default="candidate")
    parser.add_argument("--report")
    args = parser.parse_args()

    rep = refine(make_lorentz_system(), ck_metric(args.epsilon), args.iters,
                 EstimationConfig(args.samples, args.seed), sampling=args.sampling)
    for rec in rep.iterations:
        best = rec.blocks[rec.chosen]
        print(f"round {rec.iteration:2d}: split {best} (distance {rec.values[rec.chosen]:.4f}) "
              f"-> {rec.n_states} states")
    print("partition:", " ".join(rep.partition.to_strings()))
    for line in rep.drop_explanations():
        print("dropped:", line)
    if args.report:
        io.write_json(args.report, io.report_to_dict(rep))


if __name__ == "__main__":
    main()
