import random

from hypothesis import given, settings, strategies as st

from hybridlab import parse_program, place_labels, run_concrete
from hybridlab.benchgen import generate_small
from hybridlab.concolic import FULL, OPTIMISTIC, ConcolicConfig, ConcolicEngine, run_concolic
from hybridlab.solver import UNSAT

from strategies import random_program

NOTHING = frozenset()
BIG = 10**7


MAGIC = """
input 6
func main(entry=b0) {
b0:
  v1 = in.u32 0
  v2 = cmp.eq v1, 0xCAFEBABE
  br v2, b1, b2
b1:
  ret
b2:
  ret
}
"""


def flip_ok(p, seed, case):
    """Replay follows the seed's prefix up to the branch, then the wanted arm."""
    ids = p.node_index()
    orig = run_concrete(p, None, seed).block_seq
    got = run_concrete(p, None, case.data).block_seq
    k = case.seq_index
    f, blk = case.site
    br = p.function(f).block(blk).term
    want = ids[(f, br.then if case.direction else br.other)]
    return got[: k + 1] == orig[: k + 1] and len(got) > k + 1 and got[k + 1] == want


def test_magic_flip_preserves_tail():
    p = parse_program(MAGIC)
    seed = bytes([0, 0, 0, 0, 0x11, 0x22])
    res = run_concolic(p, place_labels(p), NOTHING, seed, BIG)
    flips = [c for c in res.cases if c.kind == "flip"]
    assert [c.data for c in flips] == [bytes([0xBE, 0xBA, 0xFE, 0xCA, 0x11, 0x22])]
    assert flip_ok(p, seed, flips[0])


def test_covered_arm_is_not_flipped():
    p = parse_program(MAGIC)
    ids = p.node_index()
    covered = {(ids[("main", "b0")], ids[("main", "b1")])}
    res = run_concolic(p, place_labels(p), covered, bytes(6), BIG)
    assert res.cases == [] and res.attempted == []


SIZE = """
input 4
func main(entry=b0) {
b0:
  v1 = in.u32 0
  v2 = add.u32 v1, 1
  v3 = arr.alloc.u8 16
  v4 = arr.load v3, v2
  ret
}
"""


def test_size_plus_one_witness():
    p = parse_program(SIZE)
    ls = place_labels(p)
    res = run_concolic(p, ls, NOTHING, bytes(4), BIG)
    assert res.triggered[1] == b"\xff\xff\xff\xff"
    assert 1 in run_concrete(p, ls, res.triggered[1]).violated_ids()


GUARDED = """
input 4
func main(entry=b0) {
b0:
  v1 = in.u32 0
  v2 = cmp.ult v1, 10
  br v2, b1, b3
b1:
  jmp b2
b2:
  v3 = add.u32 v1, 0x80000000
  jmp b3
b3:
  ret
}
"""


def test_guarded_contradiction_full_unsat_optimistic_unconfirmed():
    p = parse_program(GUARDED)
    ls = place_labels(p)
    res = run_concolic(p, ls, NOTHING, bytes(4), BIG)
    modes = {v.mode: v for v in res.verifications if v.label_id == 1}
    assert modes[FULL].result.status == UNSAT and not modes[FULL].triggered
    assert modes[OPTIMISTIC].result.sat and not modes[OPTIMISTIC].triggered
    assert 1 not in res.triggered
    # the optimistic witness is still handed out as an ordinary input
    assert any(c.kind == "verify" and c.mode == OPTIMISTIC for c in res.cases)


def test_triggered_labels_not_rechecked():
    p = parse_program(SIZE)
    res = run_concolic(p, place_labels(p), NOTHING, bytes(4), BIG, triggered=frozenset({1, 2}))
    assert res.verifications == []


def test_reset_is_stateless():
    text, _ = generate_small(3)
    p = parse_program(text)
    eng = ConcolicEngine(p, place_labels(p))
    a, b = bytes(2), b"\x41\x42"

    def snap(seed):
        r = eng.run(seed, NOTHING, BIG, rng=random.Random(1))
        return (r.cases, r.verifications, r.attempted, r.block_seq, r.units)

    first = snap(a)
    snap(b)
    assert snap(a) == first
    size = eng.state_size()
    for _ in range(1000):
        eng.reset()
    eng.run(a, NOTHING, BIG)
    eng.reset()
    assert eng.state_size() <= size


def test_budget_exhaustion_is_reported():
    p = parse_program(MAGIC)
    res = run_concolic(p, place_labels(p), NOTHING, bytes(6), 2)
    assert res.exhausted and res.units <= 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.binary(min_size=3, max_size=3))
def test_shadow_flip_fidelity_and_byte_preservation(seed, data):
    p = parse_program(random_program(seed))
    ls = place_labels(p)
    data = data[: p.input_len]
    eng = ConcolicEngine(p, ls, ConcolicConfig(check_shadow=True))
    res = eng.run(data, NOTHING, BIG, rng=random.Random(seed))
    for c in res.cases:
        assert all(c.data[k] == data[k] for k in range(len(data)) if k not in c.support)
        if c.kind == "flip":
            assert flip_ok(p, data, c)
    for lid, w in res.triggered.items():
        assert lid in run_concrete(p, ls, w).violated_ids()


def _agrees_with_enumeration(p, ls, seed, res, traces):
    """Full-mode UNSAT: no input with the same block prefix violates the label."""
    base = run_concrete(p, ls, seed).block_seq
    for v in res.verifications:
        if v.mode != FULL or v.result.status != UNSAT:
            continue
        prefix = base[: v.seq_index + 1]
        if any(t.block_seq[: len(prefix)] == prefix and v.label_id in t.violated_ids() for t in traces):
            return False
    return True


def test_full_unsat_matches_enumeration():
    r = random.Random(7)
    for seed in range(40):
        p = parse_program(random_program(seed, input_len=1 + seed % 2, loops=False))
        ls = place_labels(p)
        traces = [run_concrete(p, ls, x.to_bytes(p.input_len, "little")) for x in range(256 ** p.input_len)]
        for _ in range(2):
            data = bytes(r.randrange(256) for _ in range(p.input_len))
            res = run_concolic(p, ls, NOTHING, data, BIG)
            assert _agrees_with_enumeration(p, ls, data, res, traces), (seed, data)


def test_later_loop_visit_counts_as_trigger(data_dir):
    p = parse_program((data_dir / "loop_le.ir").read_text())
    ls = place_labels(p)
    res = run_concolic(p, ls, NOTHING, bytes(16), BIG)
    assert 1 in res.triggered  # i == 16 on the last iteration
