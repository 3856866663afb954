import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from hybridlab import parse_program, place_labels, run_concrete
from hybridlab.fuzz import (BUCKET_HIGHS, CONCOLIC, MUTATIONS, CoverageMap, Fuzzer, SeedStore, bucket_of,
                            mutate, mutate_one)

from strategies import random_program


@pytest.mark.parametrize("hits, bucket", [(1, 0), (3, 2), (5, 3), (128, 7), (10**9, 7), (7, 3), (8, 4)])
def test_bucket_examples(hits, bucket):
    assert bucket_of(hits) == bucket


def test_bucket_rejects_zero():
    with pytest.raises(ValueError):
        bucket_of(0)


def test_bucket_is_monotone_step():
    prev = 0
    for h in range(1, 300):
        b = bucket_of(h)
        assert prev <= b <= prev + 1
        prev = b
    assert [bucket_of(h + 1) - bucket_of(h) for h in BUCKET_HIGHS] == [1] * 7


def test_bitflip_bit_zero():
    d = bytearray(4)
    rng = random.Random()
    rng.randrange = lambda n: 0
    mutate_one(d, rng, "bitflip")
    assert d[0] == 1


def test_interesting_u32_little_endian():
    d = bytearray(8)
    rng = random.Random()
    seq = iter([5, 0])  # INTERESTING[5] is 0x7FFFFFFF/4 bytes; offset slot 0
    rng.randrange = lambda n: next(seq)
    mutate_one(d, rng, "interesting")
    assert bytes(d[:4]) == b"\xff\xff\xff\x7f"


def test_every_operator_fires():
    rng = random.Random(3)
    counts = Counter()
    base = bytes(16)
    for _ in range(100_000):
        op = MUTATIONS[rng.randrange(len(MUTATIONS))]
        d = bytearray(base)
        mutate_one(d, rng, op, b"\x01" * 16)
        counts[op] += d != base
    assert all(counts[op] > 0 for op in MUTATIONS)


def test_mutate_keeps_length():
    rng = random.Random(0)
    assert all(len(mutate(bytes(10), rng)) == 10 for _ in range(1000))


NEAR = """
input 2
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = cmp.eq v1, 0x41
  br v2, b1, b2
b1:
  ret
b2:
  ret
}
"""

MAGIC = NEAR.replace("in.u8 0", "in.u32 0").replace("0x41", "0xCAFEBABE").replace("input 2", "input 8")


def _fuzzer(text, seed=0, data=None):
    p = parse_program(text)
    fz = Fuzzer(p, place_labels(p), random.Random(seed))
    fz.add_initial(data if data is not None else bytes(p.input_len))
    return p, fz


def test_neighbour_byte_found_quickly():
    p, fz = _fuzzer(NEAR, data=b"\x40\x00")
    fz.fuzz_round(500)
    ids = p.node_index()
    assert (ids[("main", "b0")], ids[("main", "b1")]) in fz.cov


def test_magic_not_found_by_mutation():
    p, fz = _fuzzer(MAGIC, seed=11)
    fz.fuzz_round(20_000)
    ids = p.node_index()
    assert (ids[("main", "b0")], ids[("main", "b1")]) not in fz.cov


def test_zero_budget_is_noop():
    _, fz = _fuzzer(NEAR)
    before = fz.cov.copy()
    assert fz.fuzz_round(0) == []
    assert fz.cov == before


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_and_retention_sound(seed):
    p, fz = _fuzzer(random_program(seed, input_len=3), seed)
    pairs = fz.cov.pairs()
    for _ in range(3):
        known = fz.cov.copy()
        new = fz.fuzz_round(200)
        assert fz.cov.pairs() >= pairs
        pairs = fz.cov.pairs()
        for s in new:
            hits = run_concrete(p, fz.labels, s.data).edge_hits()
            assert s.plus_cov and known.novel(hits)
            known.add(hits)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.dictionaries(st.tuples(st.integers(0, 5), st.integers(0, 5)), st.integers(1, 255)),
                min_size=1, max_size=4))
def test_join_commutes(maps):
    parts = [CoverageMap(m) for m in maps]
    a, b = CoverageMap(), CoverageMap()
    for m in parts:
        a.join(m)
    for m in reversed(parts):
        b.join(m)
    assert a == b


def test_seed_filenames_and_store(tmp_path):
    p = parse_program(NEAR)
    fz = Fuzzer(p, place_labels(p), random.Random(0), store=SeedStore(str(tmp_path)))
    fz.add_initial(b"\x40\x00")
    tr = run_concrete(p, None, b"\x41\x00")
    s = fz.make_seed(b"\x41\x00", tr, CONCOLIC, 0, True)
    assert fz.queue[0].filename == "id-0,src-none,initial,+cov"
    assert s.filename == "id-1,src-0,concolic,+cov"
    assert (tmp_path / s.filename).read_bytes() == b"\x41\x00"


def test_uncovered_recomputed_against_map():
    p, fz = _fuzzer(NEAR, data=b"\x40\x00")
    s = fz.queue[0]
    assert s.uncovered(fz.cov) == [(("main", "b0"), True)]
    fz.execute(b"\x41\x00", "fuzzer")
    assert s.uncovered(fz.cov) == []
