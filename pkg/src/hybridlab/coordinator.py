"""Seed scoring, concolic scheduling, triage and campaign rounds."""
from __future__ import annotations

import json
import math
import os
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

from .concolic import ConcolicConfig, ConcolicEngine, ConcolicResult
from .fuzz import CONCOLIC, Fuzzer, Seed, SeedStore
from .icfg import ReachTable, build_inter_cfg, compute_reach
from .ir import Br, Program
from .labels import LabelSet, place_labels
from .rngs import spawn
from .trim import trim_labels

POLICIES = ("savior", "random", "smallest")

Branch = tuple[tuple[str, str], bool]  # ((function, block), direction)


@dataclass
class CampaignConfig:
    policy: str = "savior"
    rounds: int = 30
    fuzz_execs: int = 1000
    k: int = 1
    tau: int = 10_000
    rng: int = 0
    decay: float = 0.05
    stop: str = "rounds"  # "rounds", "all-planted" or "any-planted"
    concolic: bool = True
    trim: bool = True
    workers: int = 1
    async_mode: bool = False
    exec_budget: int = 100_000
    search_budget: int = 2000

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.k < 1 or self.tau < 1:
            raise ValueError("k and tau must be at least 1")
        if self.stop not in ("rounds", "all-planted", "any-planted"):
            raise ValueError(f"unknown stop condition {self.stop!r}")

    @classmethod
    def from_mapping(cls, d: dict) -> "CampaignConfig":
        """Build from string values, e.g. a parsed ``key = value`` file."""
        kw = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, raw in d.items():
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            t = types[key]
            if t in ("bool", bool):
                kw[key] = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes", "on")
            elif t in ("int", int):
                kw[key] = int(raw)
            elif t in ("float", float):
                kw[key] = float(raw)
            else:
                kw[key] = str(raw)
        return cls(**kw)


@dataclass(frozen=True)
class SeedScore:
    seed_id: int
    n: int
    terms: tuple[tuple[Branch, int, int, float], ...]
    score: float


class AttemptLedger:
    def __init__(self):
        self.counts: dict[Branch, int] = {}

    def get(self, key: Branch) -> int:
        return self.counts.get(key, 0)

    def bump(self, key: Branch) -> None:
        self.counts[key] = self.counts.get(key, 0) + 1


def branch_targets(p: Program) -> dict[Branch, tuple[str, str]]:
    """(site, direction) -> the block that direction leads to."""
    out = {}
    for f in p.functions:
        for b in f.blocks:
            if isinstance(b.term, Br):
                out[((f.name, b.label), True)] = (f.name, b.term.then)
                out[((f.name, b.label), False)] = (f.name, b.term.other)
    return out


def score_terms(terms: list[tuple[int, int]], decay: float = 0.05) -> float:
    """(1/n) * sum(exp(-decay * S_i) * L_i) over (L_i, S_i) pairs; 0 when n = 0."""
    if not terms:
        return 0.0
    return math.fsum(math.exp(-decay * s) * l for l, s in terms) / len(terms)


def score_seed(seed: Seed, reach: ReachTable, ledger: AttemptLedger, cov, targets: dict,
               decay: float = 0.05) -> SeedScore:
    terms = []
    for key in seed.uncovered(cov):
        L = reach.anchor_count(targets[key])
        S = ledger.get(key)
        terms.append((key, L, S, math.exp(-decay * S) * L))
    score = math.fsum(t[3] for t in terms) / len(terms) if terms else 0.0
    return SeedScore(seed.id, len(terms), tuple(terms), score)


def select_for_concolic(queue: list[Seed], scores: dict[int, float], k: int, policy: str = "savior",
                        rng: random.Random | None = None) -> list[Seed]:
    eligible = [s for s in queue if not s.concolic_tested]
    if not eligible:
        return []
    if policy == "random":
        rng = rng or random.Random(0)
        return rng.sample(eligible, min(k, len(eligible)))
    if policy == "smallest":
        return sorted(eligible, key=lambda s: (s.meaningful_len, s.id))[:k]
    return sorted(eligible, key=lambda s: (-scores.get(s.id, 0.0), not s.plus_cov, s.id))[:k]


def concolic_timeout(n_uncovered: int, tau: int = 10_000) -> int:
    return tau * max(1, n_uncovered)


@dataclass
class RoundStats:
    round: int
    edges: int
    pairs: int
    labels_reached: int
    labels_triggered: int
    planted_triggered: int
    policy: str
    selected: list[int]

    def to_json(self) -> str:
        return json.dumps({f.name: getattr(self, f.name) for f in fields(self)})


@dataclass
class TriageResult:
    retained: list[Seed] = field(default_factory=list)
    bumped: list[Branch] = field(default_factory=list)


@dataclass
class BugRecord:
    label_id: int
    family: str
    first_round: int
    witness: bytes
    witness_file: str = ""


class Campaign:
    """One hybrid-testing campaign over a program; rounds are synchronous."""

    def __init__(self, p: Program, config: CampaignConfig, labels: LabelSet | None = None,
                 planted: set[int] | frozenset[int] = frozenset(), out_dir: str | None = None,
                 initial_seeds: list[bytes] | None = None):
        self.p = p
        self.cfg = config
        labels = labels if labels is not None else place_labels(p)
        if config.trim:
            labels, self.trim_report = trim_labels(p, labels)
        self.labels = labels
        self.live = labels.live_ids()
        self.cfg_graph = build_inter_cfg(p)
        self.reach = compute_reach(self.cfg_graph, labels)
        self.targets = branch_targets(p)
        self.node_ids = p.node_index()
        self.planted = frozenset(planted)
        r_fuzz, r_sel, r_solve = spawn(config.rng, 3)
        self.sel_rng, self.solve_rng = r_sel, r_solve
        seed_dir = os.environ.get("HFL_SEED_DIR") or (os.path.join(out_dir, "queue") if out_dir else None)
        self.out_dir = out_dir
        self.fuzzer = Fuzzer(p, labels, r_fuzz, config.exec_budget, SeedStore(seed_dir) if seed_dir else None)
        ccfg = ConcolicConfig(search_budget=config.search_budget)
        self.engines = [ConcolicEngine(p, labels, ccfg) for _ in range(max(1, config.workers))]
        self.ledger = AttemptLedger()
        self.scores: dict[int, SeedScore] = {}
        self.bugs: dict[int, BugRecord] = {}
        self.stats: list[RoundStats] = []
        self.round = 0
        for data in initial_seeds or [bytes(p.input_len)]:
            self.fuzzer.add_initial(data)
        self._note_bugs()

    # bookkeeping -------------------------------------------------------

    def _note_bugs(self) -> None:
        for lid, data in self.fuzzer.triggered.items():
            if lid not in self.bugs:
                self.bugs[lid] = BugRecord(lid, self.labels[lid].family, self.round, data)

    def rescore(self) -> None:
        """Re-score every seed not yet handed to the concolic engine."""
        for s in self.fuzzer.queue:
            if not s.concolic_tested:
                self.scores[s.id] = score_seed(s, self.reach, self.ledger, self.fuzzer.cov, self.targets,
                                               self.cfg.decay)

    def uncovered_count(self, seed: Seed) -> int:
        return len(seed.uncovered(self.fuzzer.cov))

    def triage(self, source: Seed, res: ConcolicResult) -> TriageResult:
        fz = self.fuzzer
        out = TriageResult()
        for case in res.cases:
            tr = fz.exe.run(case.data)
            fz.stats.execs += 1
            untriggered = (tr.labels_reached & self.live) - fz.triggered.keys()
            fz._record(tr, case.data)
            new = fz.cov.add(tr.edge_hits())
            fz.paths.add(tuple(tr.block_seq))
            if new or untriggered:
                out.retained.append(fz.make_seed(case.data, tr, CONCOLIC, source.id, new > 0))
        seen = set()
        for key in res.attempted:
            if key in seen:
                continue
            seen.add(key)
            site, direction = key
            edge = (self.node_ids[site], self.node_ids[self.targets[key]])
            if edge not in fz.cov:
                self.ledger.bump(key)
                out.bumped.append(key)
        return out

    def _concolic(self, engine: ConcolicEngine, seed: Seed, rng: random.Random) -> ConcolicResult:
        budget = concolic_timeout(self.uncovered_count(seed), self.cfg.tau)
        return engine.run(seed.data, self.fuzzer.cov, budget, frozenset(self.fuzzer.triggered), rng)

    def concolic_stage(self) -> list[int]:
        self.rescore()
        flat = {k: v.score for k, v in self.scores.items()}
        chosen = select_for_concolic(self.fuzzer.queue, flat, self.cfg.k, self.cfg.policy, self.sel_rng)
        for s in chosen:
            s.concolic_tested = True
        rngs = [random.Random(self.solve_rng.getrandbits(64)) for _ in chosen]
        if self.cfg.workers > 1 and len(chosen) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                futs = [pool.submit(self._concolic, self.engines[i % len(self.engines)], s, r)
                        for i, (s, r) in enumerate(zip(chosen, rngs))]
                results = [f.result() for f in futs]
        else:
            results = [self._concolic(self.engines[0], s, r) for s, r in zip(chosen, rngs)]
        # merge in selection order so the outcome does not depend on timing
        for s, res in zip(chosen, results):
            self.triage(s, res)
        return [s.id for s in chosen]

    def step(self) -> RoundStats:
        self.round += 1
        if self.cfg.async_mode and self.cfg.concolic:
            selected = self._async_round()
        else:
            self.fuzzer.fuzz_round(self.cfg.fuzz_execs)
            selected = self.concolic_stage() if self.cfg.concolic else []
        self._note_bugs()
        fz = self.fuzzer
        st = RoundStats(self.round, len(fz.cov), fz.cov.n_pairs, len(fz.labels_reached & self.live),
                        len(fz.triggered), len(self.planted & fz.triggered.keys()), self.cfg.policy, selected)
        self.stats.append(st)
        return st

    def _async_round(self) -> list[int]:
        """Concolic runs proceed in a worker thread while the fuzzer runs.

        Selection uses scores from the previous round boundary; coverage
        joins are monotone, so only scheduling order depends on timing.
        """
        self.rescore()
        flat = {k: v.score for k, v in self.scores.items()}
        chosen = select_for_concolic(self.fuzzer.queue, flat, self.cfg.k, self.cfg.policy, self.sel_rng)
        for s in chosen:
            s.concolic_tested = True
        snapshot = self.fuzzer.cov.copy()
        trig = frozenset(self.fuzzer.triggered)
        results: list[ConcolicResult] = []
        rngs = [random.Random(self.solve_rng.getrandbits(64)) for _ in chosen]

        def work():
            for s, r in zip(chosen, rngs):
                budget = concolic_timeout(len(s.uncovered(snapshot)), self.cfg.tau)
                results.append(self.engines[0].run(s.data, snapshot, budget, trig, r))

        t = threading.Thread(target=work)
        t.start()
        self.fuzzer.fuzz_round(self.cfg.fuzz_execs)
        t.join()
        for s, res in zip(chosen, results):
            self.triage(s, res)
        return [s.id for s in chosen]

    def done(self) -> bool:
        got = self.planted & self.fuzzer.triggered.keys()
        if self.cfg.stop == "all-planted":
            return bool(self.planted) and got == self.planted
        if self.cfg.stop == "any-planted":
            return bool(got)
        return False

    def run(self, on_round=None) -> list[RoundStats]:
        while self.round < self.cfg.rounds and not self.done():
            st = self.step()
            if on_round is not None:
                on_round(st)
        return self.stats

    # reports -----------------------------------------------------------

    def bug_report(self) -> list[BugRecord]:
        rows = []
        wdir = os.path.join(self.out_dir, "witnesses") if self.out_dir else None
        if wdir:
            os.makedirs(wdir, exist_ok=True)
        for lid in sorted(self.bugs):
            b = self.bugs[lid]
            if wdir:
                b.witness_file = os.path.join("witnesses", f"label-{lid}")
                with open(os.path.join(self.out_dir, b.witness_file), "wb") as fh:
                    fh.write(b.witness)
            rows.append(b)
        return rows

    @staticmethod
    def format_report(rows: list[BugRecord]) -> str:
        lines = ["label_id,family,first_round,witness_file"]
        lines += [f"{b.label_id},{b.family},{b.first_round},{b.witness_file}" for b in rows]
        return "\n".join(lines) + "\n"

    def first_round(self, bug_ids) -> int | None:
        rounds = [self.bugs[b].first_round for b in bug_ids if b in self.bugs]
        return min(rounds) if rounds else None


def run_campaign(p: Program, config: CampaignConfig, **kw) -> Campaign:
    c = Campaign(p, config, **kw)
    c.run()
    return c
