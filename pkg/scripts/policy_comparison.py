"""Rounds to the first dense-region bug under each scheduling policy.

    python3 scripts/policy_comparison.py --programs 10 --reps 5 --out policy.csv
"""
import argparse
import csv
import statistics
import sys

from scipy.stats import mannwhitneyu

from hybridlab import parse_program
from hybridlab.benchgen import BenchSpec, generate
from hybridlab.coordinator import POLICIES, Campaign, CampaignConfig


def first_dense(p, dense, policy, rng, cap, execs):
    c = Campaign(p, CampaignConfig(policy=policy, rounds=cap, fuzz_execs=execs, rng=rng, stop="any-planted"),
                 planted=dense)
    c.run()
    r = c.first_round(dense)
    return cap + 1 if r is None else r


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--programs", type=int, default=10)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--skew", type=float, default=10.0)
    ap.add_argument("--cap", type=int, default=40, help="round cap; misses are recorded as cap+1")
    ap.add_argument("--fuzz-execs", type=int, default=500)
    ap.add_argument("--policies", nargs="+", default=list(POLICIES), choices=POLICIES)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--out")
    a = ap.parse_args()

    rows = []
    for k in range(a.programs):
        seed = a.first_seed + k
        text, man = generate(BenchSpec(seed=seed, density_skew=a.skew))
        p = parse_program(text)
        dense = set(man.region_bugs("d"))
        got = {pol: [first_dense(p, dense, pol, r, a.cap, a.fuzz_execs) for r in range(a.reps)]
               for pol in a.policies}
        for pol, vals in got.items():
            rows += [(seed, pol, r, v) for r, v in enumerate(vals)]
        line = " ".join(f"{pol}={statistics.median(v):g}" for pol, v in got.items())
        if "savior" in got and "random" in got:
            line += f" p={mannwhitneyu(got['savior'], got['random'], alternative='less').pvalue:.4f}"
        print(f"program {seed}: {line}", flush=True)

    fh = open(a.out, "w", newline="") if a.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["program", "policy", "rep", "rounds"])
    w.writerows(rows)
    if a.out:
        fh.close()


if __name__ == "__main__":
    main()
