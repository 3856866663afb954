"""Check static trimming against exhaustive enumeration on small programs.

    python3 scripts/trim_soundness.py --programs 100
"""
import argparse

from hybridlab import parse_program, place_labels
from hybridlab.benchgen import generate_small
from hybridlab.exhaustive import exhaustive_violations
from hybridlab.trim import trim_labels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--programs", type=int, default=100)
    ap.add_argument("--extra-labels", type=int, default=4)
    a = ap.parse_args()

    total = trimmed = unsound = 0
    for seed in range(a.programs):
        text, _ = generate_small(seed, input_len=1 + seed % 2, trimmable=seed % 3 == 0,
                                 extra_labels=a.extra_labels)
        p = parse_program(text)
        ls = place_labels(p)
        _, rep = trim_labels(p, ls)
        total += rep.total
        trimmed += len(rep.trimmed)
        if rep.trimmed:
            bad = set(rep.trimmed) & set(exhaustive_violations(p, ls).violations)
            unsound += len(bad)
            if bad:
                print(f"program {seed}: trimmed but triggerable {sorted(bad)}")
    print(f"{trimmed}/{total} labels trimmed, {unsound} triggerable")


if __name__ == "__main__":
    main()
