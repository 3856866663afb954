"""Acceptance criteria; each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import io
import math
import random
import statistics
import time
from decimal import Decimal, getcontext

import mpmath
import pytest
from scipy.stats import mannwhitneyu

from hybridlab import parse_program, place_labels, run_concrete
from hybridlab.benchgen import BenchSpec, generate, generate_small, plant_infeasible
from hybridlab.cli import main as cli_main
from hybridlab.concolic import FULL, ConcolicEngine, run_concolic
from hybridlab.coordinator import Campaign, CampaignConfig, score_seed, score_terms
from hybridlab.exhaustive import exhaustive_violations
from hybridlab.fuzz import Fuzzer, bucket_of
from hybridlab.icfg import build_inter_cfg, compute_reach, reach_sets
from hybridlab.solver import UNSAT
from hybridlab.trim import trim_labels
from hybridlab.rngs import spawn

from strategies import random_digraph, random_program
from test_concolic import flip_ok
from test_icfg import _bfs_reach

BIG = 10**7


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{elapsed:.1f}s / {limit}s]")
        assert ok, detail
    return emit


class _Recording(Campaign):
    """Campaign that keeps every concolic result for inspection."""

    def __init__(self, *a, **kw):
        self.log = []
        super().__init__(*a, **kw)

    def _concolic(self, engine, seed, rng):
        res = super()._concolic(engine, seed, rng)
        self.log.append(res)
        return res


def test_c1_seed_score(report, data_dir):
    t = time.perf_counter()
    mpmath.mp.dps = 40
    c = Campaign(parse_program((data_dir / "seedscore.ir").read_text()), CampaignConfig())
    S1, S2 = 4, 9
    c.ledger.counts[(("main", "b2"), True)] = S1
    c.ledger.counts[(("main", "b3"), True)] = S2
    sc = score_seed(c.fuzzer.queue[0], c.reach, c.ledger, c.fuzzer.cov, c.targets)
    L1, L2 = (L for _, L, _, _ in sorted(sc.terms))
    oracle = (mpmath.exp(-mpmath.mpf("0.05") * S1) * L1 + mpmath.exp(-mpmath.mpf("0.05") * S2) * L2) / 2
    err = abs(sc.score - float(oracle))
    ok = sc.n == 2 and (L1, L2) == (3, 1) and err < 1e-9
    # independent route: Decimal closed form over random ledgers
    getcontext().prec = 40
    r = random.Random(2024)
    worst = 0.0
    for _ in range(1000):
        terms = [(r.randint(0, 400), r.randint(0, 200)) for _ in range(r.randint(1, 12))]
        d = sum(Decimal(-0.05 * s).exp() * l for l, s in terms) / len(terms)
        worst = max(worst, abs(score_terms(terms) - float(d)))
    ok = ok and worst < 1e-9
    report(1, ok, f"figure err {err:.2e}, 1000 ledgers max err {worst:.2e}", time.perf_counter() - t, 1)


def test_c2_buckets(report):
    t = time.perf_counter()
    ranges = [(1, 1), (2, 2), (3, 3), (4, 7), (8, 15), (16, 31), (32, 127), (128, math.inf)]

    def oracle(h):
        return next(k for k, (lo, hi) in enumerate(ranges) if lo <= h <= hi)

    bad = [h for h in list(range(1, 1001)) + [2**31] if bucket_of(h) != oracle(h)]
    report(2, not bad, f"{1001 - len(bad)}/1001 hit counts agree", time.perf_counter() - t, 1)


def test_c3_trim_soundness(report, data_dir):
    t = time.perf_counter()
    p = parse_program((data_dir / "loop.ir").read_text())
    ls = place_labels(p)
    _, rep = trim_labels(p, ls)
    loop_ok = set(rep.trimmed) == set(ls.live_ids()) and len(rep.trimmed) == 2
    trimmed = unsound = 0
    for seed in range(200):
        p = parse_program(random_program(10_000 + seed, input_len=1 + seed % 3))
        ls = place_labels(p)
        _, rep = trim_labels(p, ls)
        if not rep.trimmed:
            continue
        trimmed += len(rep.trimmed)
        ex = exhaustive_violations(p, ls)
        unsound += len(set(rep.trimmed) & set(ex.violations))
    ok = loop_ok and unsound == 0 and trimmed > 0
    report(3, ok, f"loop example both trimmed={loop_ok}; {trimmed} trimmed labels over 200 programs, "
                  f"{unsound} triggerable", time.perf_counter() - t, 300)


def test_c4_reachability(report, data_dir):
    t = time.perf_counter()
    p = parse_program((data_dir / "figure.ir").read_text())
    fig = compute_reach(build_inter_cfg(p), place_labels(p)).count(("main", "bb"))
    r = random.Random(44)
    mismatches = 0
    for _ in range(500):
        succ = random_digraph(r, 15, r.choice((0.06, 0.12, 0.2, 0.3)))
        labels = {n: list(range(n * 10, n * 10 + r.randint(0, 3))) for n in succ}
        got = reach_sets(list(succ), succ, labels)
        mismatches += sum(got[n] != _bfs_reach(succ, labels, n) for n in succ)
    report(4, fig == 3 and mismatches == 0, f"figure count {fig}; 500 graphs, {mismatches} node mismatches",
           time.perf_counter() - t, 30)


def test_c5_flip_fidelity(report):
    t = time.perf_counter()
    total = bad = 0
    for seed in range(100):
        text, man = generate(BenchSpec(seed=seed, input_len=32 + seed % 3 * 16))
        p = parse_program(text)
        ls = place_labels(p)
        eng = ConcolicEngine(p, ls)
        for data in [bytes(p.input_len)] + [b.input for b in man.plants]:
            res = eng.run(data, frozenset(), BIG, rng=random.Random(seed))
            for c in res.cases:
                if c.kind == "flip":
                    total += 1
                    bad += not flip_ok(p, data, c)
    report(5, bad == 0 and total > 0, f"{total - bad}/{total} SAT flips take the flipped arm after the same prefix",
           time.perf_counter() - t, 300)


def _enumeration_agrees(p, ls, data, res, traces):
    base = run_concrete(p, ls, data).block_seq
    for v in res.verifications:
        if v.mode == FULL and v.result.status == UNSAT:
            prefix = base[: v.seq_index + 1]
            if any(tr.block_seq[: len(prefix)] == prefix and v.label_id in tr.violated_ids() for tr in traces):
                return False
    return True


def test_c6_verification_completeness(report):
    t = time.perf_counter()
    feasible = hit = infeasible_checks = infeasible_bad = 0
    for seed in range(20):
        text, man = plant_infeasible(BenchSpec(seed=seed), trimmable=False)
        p = parse_program(text)
        plants = {b.bug_id for b in man.plants}
        c = _Recording(p, CampaignConfig(rounds=120, fuzz_execs=300, stop="all-planted", rng=seed), planted=plants)
        c.run()
        verified = {v.label_id for r in c.log for v in r.verifications if v.triggered}
        feasible += len(plants)
        hit += len(plants & verified)
        for r in c.log:
            for v in r.verifications:
                if v.label_id in man.infeasible:
                    infeasible_checks += v.mode == FULL
                    infeasible_bad += v.triggered or (v.mode == FULL and v.result.status != UNSAT)
        infeasible_bad += bool(set(man.infeasible) & c.fuzzer.triggered.keys())
    # small instances: compare against every input
    agree = small = 0
    for seed in range(10):
        text, man = generate_small(seed, input_len=1 + seed % 2)
        p = parse_program(text)
        ls = place_labels(p)
        traces = [run_concrete(p, ls, x.to_bytes(p.input_len, "little")) for x in range(256 ** p.input_len)]
        ex = exhaustive_violations(p, ls)
        r = random.Random(seed)
        for data in [bytes(p.input_len)] + [bytes(r.randrange(256) for _ in range(p.input_len)) for _ in range(3)]:
            res = run_concolic(p, ls, frozenset(), data, BIG)
            small += 1
            agree += (_enumeration_agrees(p, ls, data, res, traces)
                      and set(res.triggered) <= set(ex.violations))
    ok = hit == feasible and infeasible_checks > 0 and infeasible_bad == 0 and agree == small
    report(6, ok, f"plants triggered {hit}/{feasible}; infeasible full checks {infeasible_checks}, "
                  f"{infeasible_bad} not UNSAT; enumeration agreement {agree}/{small}", time.perf_counter() - t, 600)


CAP = 40


def _first_dense(p, dense, policy, rng):
    c = Campaign(p, CampaignConfig(policy=policy, rounds=CAP, fuzz_execs=500, rng=rng, stop="any-planted"),
                 planted=dense)
    c.run()
    r = c.first_round(dense)
    return CAP + 1 if r is None else r  # censored at the cap


def test_c7_scheduling_advantage(report):
    t = time.perf_counter()
    ratios, wins = [], 0
    for seed in range(20):
        text, man = generate(BenchSpec(seed=300 + seed, density_skew=5 + seed % 2 * 5))
        p = parse_program(text)
        dense = set(man.region_bugs("d"))
        sav = [_first_dense(p, dense, "savior", r) for r in range(5)]
        rnd = [_first_dense(p, dense, "random", r) for r in range(5)]
        ratios.append(statistics.median(sav) / statistics.median(rnd))
        wins += mannwhitneyu(sav, rnd, alternative="less").pvalue < 0.05
    med_ratio = statistics.median(ratios)
    worst = max(ratios)
    ok = worst <= 0.8 and wins >= 12
    report(7, ok, f"median ratio savior/random {med_ratio:.3f} (worst program {worst:.3f}); "
                  f"p<0.05 on {wins}/20 programs", time.perf_counter() - t, 1800)


def test_c8_fuzzer_hardness(report):
    t = time.perf_counter()
    hits = 0
    for trial in range(40):
        text, man = generate(BenchSpec(seed=500 + trial // 5))
        p = parse_program(text)
        plants = {b.bug_id for b in man.plants}
        fz = Fuzzer(p, place_labels(p), spawn(trial, 1)[0])
        fz.add_initial(bytes(p.input_len))
        fz.fuzz_round(100_000)
        hits += bool(plants & fz.triggered.keys())
    report(8, hits <= 2, f"fuzz-only triggered a plant in {hits}/40 trials", time.perf_counter() - t, 600)


def test_c9_determinism(report, tmp_path):
    t = time.perf_counter()
    same = 0
    for seed in range(5):
        g = tmp_path / f"g{seed}"
        assert cli_main(["gen", "--seed", str(700 + seed), "--out", str(g)], out=io.StringIO()) == 0
        outs = []
        for k in range(2):
            d = tmp_path / f"r{seed}-{k}"
            code = cli_main(["run", str(g / "prog.ir"), "--deterministic", "--rng", "5", "--rounds", "8",
                             "--manifest", str(g / "manifest.csv"), "--out", str(d)], out=io.StringIO())
            assert code == 0
            outs.append((d / "stats.jsonl").read_bytes())
        same += outs[0] == outs[1] and len(outs[0]) > 0
    report(9, same == 5, f"{same}/5 programs byte-identical", time.perf_counter() - t, 300)
