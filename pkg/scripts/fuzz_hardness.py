"""How often plain mutation fuzzing passes a magic guard.

    python3 scripts/fuzz_hardness.py --programs 8 --rngs 5 --execs 100000
"""
import argparse
import time

from hybridlab import parse_program, place_labels
from hybridlab.benchgen import BenchSpec, generate
from hybridlab.fuzz import Fuzzer
from hybridlab.rngs import spawn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--programs", type=int, default=8)
    ap.add_argument("--rngs", type=int, default=5)
    ap.add_argument("--execs", type=int, default=100_000)
    a = ap.parse_args()

    hits = trials = 0
    for k in range(a.programs):
        text, man = generate(BenchSpec(seed=k))
        p = parse_program(text)
        plants = {b.bug_id for b in man.plants}
        for r in range(a.rngs):
            t = time.perf_counter()
            fz = Fuzzer(p, place_labels(p), spawn(r, 1)[0])
            fz.add_initial(bytes(p.input_len))
            fz.fuzz_round(a.execs)
            got = plants & fz.triggered.keys()
            trials += 1
            hits += bool(got)
            print(f"program {k} rng {r}: plants {sorted(got) or '-'} edges {len(fz.cov)} "
                  f"queue {len(fz.queue)} {a.execs / (time.perf_counter() - t):.0f} exec/s", flush=True)
    print(f"triggered in {hits}/{trials} trials")


if __name__ == "__main__":
    main()
