import random
from collections import deque

from hypothesis import given, settings, strategies as st

from hybridlab import parse_program, place_labels, run_concrete
from hybridlab.benchgen import BenchSpec, generate
from hybridlab.icfg import build_inter_cfg, compute_reach, format_reach, reach_sets
from hybridlab.trim import trim_labels

from strategies import random_digraph, random_program


def _bfs_reach(succ, node_labels, start):
    seen, q = set(), deque(succ.get(start, ()))
    while q:
        n = q.popleft()
        if n in seen:
            continue
        seen.add(n)
        q.extend(succ.get(n, ()))
    return frozenset(l for n in seen for l in node_labels.get(n, ()))


def test_figure_root_reaches_three(data_dir):
    p = parse_program((data_dir / "figure.ir").read_text())
    cfg = build_inter_cfg(p)
    table = compute_reach(cfg, place_labels(p))
    assert table.count(("main", "bb")) == 3
    assert table.count(("main", "b8")) == 0  # leaf
    assert "main:bb 3\n" in format_reach(table, cfg.nodes)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_graphs_match_bfs(seed):
    r = random.Random(seed)
    succ = random_digraph(r, 15, r.choice((0.08, 0.15, 0.25)))
    labels = {n: [n * 10 + k for k in range(r.randint(0, 2))] for n in succ}
    got = reach_sets(list(succ), succ, labels)
    for n in succ:
        assert got[n] == _bfs_reach(succ, labels, n)
        for s in succ[n]:
            assert got[n] >= got[s]


TWO = """
input 2
table f0, f1, f2
func f0(entry=b0) {
b0:
  ret
}
func f1(entry=b0) {
b0:
  ret
}
func f2(entry=b0) {
b0:
  ret
}
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = const.u8 2
  icall v2
  %s
  ret
}
"""


def test_direct_calls_only():
    p = parse_program(TWO.replace("icall v2", "call f1").replace("table f0, f1, f2", "") % "")
    cfg = build_inter_cfg(p)
    assert cfg.icall_targets == {}
    assert {(a[0], b[0]) for a, b in cfg.call_edges} == {("main", "f1")}


def test_constant_icall_single_target():
    cfg = build_inter_cfg(parse_program(TWO % ""))
    assert list(cfg.icall_targets.values()) == [("f2",)]


def test_input_icall_resolves_to_table_and_covers_dynamics():
    p = parse_program(TWO % "icall v1")
    cfg = build_inter_cfg(p)
    assert ("f0", "f1", "f2") in cfg.icall_targets.values()
    edges = cfg.edges
    names = p.nodes()
    for x in range(256):
        tr = run_concrete(p, None, bytes([x, 0]))
        for site, k in tr.icall_log:
            assert p.func_table[k] in cfg.icall_targets[site]
        for a, b in zip(tr.block_seq, tr.block_seq[1:]):
            assert (names[a], names[b]) in edges


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.binary(min_size=3, max_size=3))
def test_reach_sound_against_traces(seed, data):
    p = parse_program(random_program(seed))
    ls = place_labels(p)
    table = compute_reach(build_inter_cfg(p), ls)
    names = p.nodes()
    tr = run_concrete(p, ls, data[: p.input_len])
    seq = [names[i] for i in tr.block_seq]
    for i, b in enumerate(seq):
        later = {l.id for n in seq[i + 1:] for l in ls.live_in_block(*n)}
        assert later <= table.labels(b) | table.own.get(b, frozenset())


def test_benchgen_dynamic_edges_in_static_cfg():
    text, man = generate(BenchSpec(seed=4))
    p = parse_program(text)
    edges = build_inter_cfg(p).edges
    names = p.nodes()
    for b in man.plants:
        tr = run_concrete(p, None, b.input)
        assert all((names[x], names[y]) in edges for x, y in zip(tr.block_seq, tr.block_seq[1:]))


def test_trim_never_increases_counts():
    text, _ = generate(BenchSpec(seed=2, infeasible=1, trimmable_infeasible=True))
    p = parse_program(text)
    cfg = build_inter_cfg(p)
    ls = place_labels(p)
    before = compute_reach(cfg, ls)
    after = compute_reach(cfg, trim_labels(p, ls)[0])
    assert all(after.count(n) <= before.count(n) for n in cfg.nodes)
