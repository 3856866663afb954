"""Coverage-guided mutation fuzzer with bucketed edge hit counts."""
from __future__ import annotations

import os
import random
from collections import Counter
from dataclasses import dataclass, field

from .interp import ExecTrace, executor_for
from .ir import Br, Program
from .labels import LabelSet

# upper bound (inclusive) of each hit-count bucket; the last is open-ended
BUCKET_HIGHS = (1, 2, 3, 7, 15, 31, 127)

INITIAL, FUZZER, CONCOLIC = "initial", "fuzzer", "concolic"

# (value, byte width) pairs spliced by the interesting-value mutation
INTERESTING = ((0x00, 1), (0xFF, 1), (0x7F, 1), (0x80, 1), (0xFFFF, 2), (0x7FFFFFFF, 4), (0x80000000, 4))

MUTATIONS = ("bitflip", "byteflip", "arith", "interesting", "splice")


def bucket_of(hits: int) -> int:
    if hits < 1:
        raise ValueError("hit count must be positive")
    for k, high in enumerate(BUCKET_HIGHS):
        if hits <= high:
            return k
    return 7


class CoverageMap:
    """edge -> bitmask of hit-count buckets seen; joins are bitwise OR."""

    def __init__(self, bits: dict | None = None):
        self.bits: dict[tuple[int, int], int] = dict(bits or {})

    def __contains__(self, edge) -> bool:
        return edge in self.bits

    def __len__(self) -> int:
        return len(self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, CoverageMap) and self.bits == other.bits

    def copy(self) -> "CoverageMap":
        return CoverageMap(self.bits)

    def pairs(self) -> set[tuple[tuple[int, int], int]]:
        return {(e, k) for e, m in self.bits.items() for k in range(8) if m >> k & 1}

    @property
    def n_pairs(self) -> int:
        return sum(bin(m).count("1") for m in self.bits.values())

    def novel(self, hits: Counter) -> list[tuple[tuple[int, int], int]]:
        get = self.bits.get
        out = []
        for e, c in hits.items():
            b = bucket_of(c)
            if not get(e, 0) >> b & 1:
                out.append((e, b))
        return out

    def add(self, hits: Counter) -> int:
        """Join a trace's hits; returns the number of new (edge, bucket) pairs."""
        n = 0
        for e, c in hits.items():
            bit = 1 << bucket_of(c)
            old = self.bits.get(e, 0)
            if not old & bit:
                self.bits[e] = old | bit
                n += 1
        return n

    def join(self, other: "CoverageMap") -> int:
        n = 0
        for e, m in other.bits.items():
            old = self.bits.get(e, 0)
            if m & ~old:
                n += bin(m & ~old).count("1")
                self.bits[e] = old | m
        return n


@dataclass
class Seed:
    id: int
    data: bytes
    parent: int | None
    origin: str
    plus_cov: bool
    path_digest: int
    branches: list[tuple[tuple[str, str], bool, tuple[int, int]]]
    labels_reached: frozenset[int]
    concolic_tested: bool = False
    round: int = 0

    def uncovered(self, cov) -> list[tuple[tuple[str, str], bool]]:
        """(site, direction) of branches on the path whose other arm is unexplored."""
        out, seen = [], set()
        for site, taken, other_edge in self.branches:
            key = (site, not taken)
            if key not in seen and other_edge not in cov:
                seen.add(key)
                out.append(key)
        return out

    @property
    def filename(self) -> str:
        src = "none" if self.parent is None else str(self.parent)
        return f"id-{self.id},src-{src},{self.origin}" + (",+cov" if self.plus_cov else "")

    @property
    def meaningful_len(self) -> int:
        return len(self.data.rstrip(b"\x00"))


class BranchIndex:
    """Maps node ids to their conditional-branch structure."""

    def __init__(self, p: Program):
        ids = p.node_index()
        self.info: dict[int, tuple[tuple[str, str], int, int]] = {}
        for f in p.functions:
            for b in f.blocks:
                t = b.term
                if isinstance(t, Br) and t.then != t.other:
                    self.info[ids[(f.name, b.label)]] = ((f.name, b.label), ids[(f.name, t.then)], ids[(f.name, t.other)])

    def branches(self, seq: list[int]) -> list[tuple[tuple[str, str], bool, tuple[int, int]]]:
        out, seen = [], set()
        info = self.info
        for a, b in zip(seq, seq[1:]):
            bi = info.get(a)
            if bi is None:
                continue
            site, then, other = bi
            if b == then:
                key = (site, True, (a, other))
            elif b == other:
                key = (site, False, (a, then))
            else:
                continue
            if key not in seen:
                seen.add(key)
                out.append(key)
        return out


def mutate_one(data: bytearray, rng: random.Random, op: str, donor: bytes | None = None) -> None:
    """Apply one mutation of class `op` in place."""
    n = len(data)
    if n == 0:
        return
    if op == "bitflip":
        bit = rng.randrange(8 * n)
        data[bit >> 3] ^= 1 << (bit & 7)
    elif op == "byteflip":
        data[rng.randrange(n)] ^= 0xFF
    elif op == "arith":
        k = rng.randrange(n)
        delta = rng.randint(1, 35)
        data[k] = (data[k] + (delta if rng.random() < 0.5 else -delta)) & 0xFF
    elif op == "interesting":
        value, width = INTERESTING[rng.randrange(len(INTERESTING))]
        if width > n:
            value, width = value & 0xFF, 1
        off = rng.randrange(n // width) * width
        data[off:off + width] = value.to_bytes(width, "little")
    elif op == "splice":
        src = donor if donor else bytes(data)
        length = rng.randint(1, min(16, n))
        s = rng.randrange(len(src) - length + 1) if len(src) >= length else 0
        d = rng.randrange(n - length + 1)
        chunk = src[s:s + length]
        data[d:d + len(chunk)] = chunk
    else:
        raise ValueError(op)


def mutate(data: bytes, rng: random.Random, donor: bytes | None = None) -> bytes:
    """Stack 1, 2 or 4 random mutations; output keeps the input length."""
    out = bytearray(data)
    for _ in range(rng.choice((1, 1, 2, 4))):
        mutate_one(out, rng, MUTATIONS[rng.randrange(len(MUTATIONS))], donor)
    return bytes(out)


@dataclass
class ExecResult:
    trace: ExecTrace
    new_pairs: int
    seed: Seed | None


@dataclass
class FuzzStats:
    execs: int = 0
    retained: int = 0
    per_round: list[int] = field(default_factory=list)


class SeedStore:
    """Directory of raw seed files named after their provenance."""

    def __init__(self, path: str):
        self.path = path
        os.makedirs(path, exist_ok=True)

    def save(self, seed: Seed) -> str:
        fn = os.path.join(self.path, seed.filename)
        with open(fn, "wb") as fh:
            fh.write(seed.data)
        return fn


class Fuzzer:
    FAVOR = 4
    ENERGY = 16

    def __init__(self, p: Program, labels: LabelSet, rng: random.Random, budget: int = 100_000,
                 store: SeedStore | None = None):
        self.p = p
        self.labels = labels
        self.rng = rng
        self.exe = executor_for(p, labels, budget)
        self.bi = BranchIndex(p)
        self.cov = CoverageMap()
        self.queue: list[Seed] = []
        self.paths: set[tuple] = set()
        self.labels_reached: set[int] = set()
        self.triggered: dict[int, bytes] = {}
        self.store = store
        self.stats = FuzzStats()
        self.round = 0
        self._cursor = 0
        self._energy_left = 0

    def _record(self, tr: ExecTrace, data: bytes) -> None:
        self.labels_reached |= tr.labels_reached
        for lid, _ in tr.violations:
            if lid not in self.triggered:
                self.triggered[lid] = data

    def execute(self, data: bytes, origin: str, parent: int | None = None, force: bool = False) -> ExecResult:
        """Run one input, join coverage, retain it when it adds a new pair."""
        tr = self.exe.run(data)
        self.stats.execs += 1
        self._record(tr, data)
        key = tuple(tr.block_seq)
        if key in self.paths and not force:
            return ExecResult(tr, 0, None)
        self.paths.add(key)
        new = self.cov.add(tr.edge_hits())
        if new == 0 and not force:
            return ExecResult(tr, 0, None)
        seed = self.make_seed(data, tr, origin, parent, new > 0)
        return ExecResult(tr, new, seed)

    def make_seed(self, data, tr, origin, parent, plus_cov) -> Seed:
        seed = Seed(len(self.queue), bytes(data), parent, origin, plus_cov, hash(tuple(tr.block_seq)),
                    self.bi.branches(tr.block_seq), frozenset(tr.labels_reached), round=self.round)
        self.queue.append(seed)
        self.stats.retained += 1
        if self.store is not None:
            self.store.save(seed)
        return seed

    def add_initial(self, data: bytes) -> Seed:
        data = bytes(data) + bytes(max(0, self.p.input_len - len(data)))
        return self.execute(data[: self.p.input_len], INITIAL, None, force=True).seed

    def fuzz_round(self, exec_budget: int) -> list[Seed]:
        """Spend up to `exec_budget` executions on mutants of queued seeds."""
        if not self.queue:
            raise ValueError("queue is empty")
        new: list[Seed] = []
        rng = self.rng
        for _ in range(exec_budget):
            if self._energy_left <= 0:
                self._cursor = (self._cursor + 1) % len(self.queue)
                s = self.queue[self._cursor]
                self._energy_left = self.ENERGY * (self.FAVOR if s.plus_cov else 1)
            self._energy_left -= 1
            parent = self.queue[self._cursor]
            donor = self.queue[rng.randrange(len(self.queue))].data
            cand = mutate(parent.data, rng, donor)
            r = self.execute(cand, FUZZER, parent.id)
            if r.seed is not None:
                new.append(r.seed)
        self.stats.per_round.append(len(new))
        self.round += 1
        return new
