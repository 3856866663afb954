import random

from hypothesis import given, settings, strategies as st

from hybridlab import parse_program
from hybridlab.dominators import compute_dominators, dominates, immediate_dominators

from strategies import random_digraph


def _reachable(succ, entry, removed=None):
    seen, stack = set(), [entry]
    while stack:
        n = stack.pop()
        if n in seen or n == removed:
            continue
        seen.add(n)
        stack.extend(succ.get(n, ()))
    return seen


def _idom_oracle(succ, entry):
    """idom by definition: the strict dominator that every other strict dominator dominates."""
    reach = _reachable(succ, entry)
    doms = {b: {d for d in reach if d != b and b not in _reachable(succ, entry, removed=d)} for b in reach}
    out = {entry: entry}
    for b in reach - {entry}:
        out[b] = next(d for d in doms[b] if all(o == d or o in doms[d] for o in doms[b]))
    return out


def _fn(text):
    return parse_program("input 1\nfunc main(entry=b0) {\n" + text + "\n}\n").functions[0]


def test_chain():
    f = _fn("b0:\n  jmp b1\nb1:\n  jmp b2\nb2:\n  ret")
    idom = compute_dominators(f)
    assert idom["b1"] == "b0" and idom["b2"] == "b1"


def test_diamond():
    f = _fn("b0:\n  v1 = in.u8 0\n  v2 = cmp.eq v1, 1\n  br v2, b1, b2\n"
            "b1:\n  jmp b3\nb2:\n  jmp b3\nb3:\n  ret")
    idom = compute_dominators(f)
    assert idom["b3"] == "b0"
    assert dominates(idom, "b0", "b3") and not dominates(idom, "b1", "b3")


def test_unreachable_block_absent():
    f = _fn("b0:\n  ret\nb1:\n  ret")
    assert "b1" not in compute_dominators(f)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_graphs_match_definition(seed):
    succ = random_digraph(random.Random(seed), 12, 0.2)
    assert immediate_dominators(succ, 0) == _idom_oracle(succ, 0)
