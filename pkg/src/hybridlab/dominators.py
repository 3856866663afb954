"""Immediate dominators (Cooper, Harvey & Kennedy iterative scheme)."""
from __future__ import annotations

from collections.abc import Hashable, Mapping, Sequence

from .ir import Function


def _reverse_postorder(succ: Mapping, entry) -> list:
    seen, post = {entry}, []
    stack = [(entry, iter(succ.get(entry, ())))]
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            post.append(node)
            stack.pop()
        elif nxt not in seen:
            seen.add(nxt)
            stack.append((nxt, iter(succ.get(nxt, ()))))
    return post[::-1]


def immediate_dominators(succ: Mapping[Hashable, Sequence], entry) -> dict:
    """Map every node reachable from `entry` to its immediate dominator.

    The entry maps to itself; unreachable nodes are absent.
    """
    order = _reverse_postorder(succ, entry)
    rpo = {n: i for i, n in enumerate(order)}
    preds: dict = {n: [] for n in order}
    for n in order:
        for s in succ.get(n, ()):
            if s in rpo:
                preds[s].append(n)
    idom = {entry: entry}

    def intersect(a, b):
        while a != b:
            while rpo[a] > rpo[b]:
                a = idom[a]
            while rpo[b] > rpo[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in order[1:]:
            new = None
            for q in preds[n]:
                if q in idom:
                    new = q if new is None else intersect(q, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    return idom


def compute_dominators(f: Function) -> dict[str, str]:
    return immediate_dominators(f.successors(), f.entry_block)


def dominates(idom: Mapping, a, b) -> bool:
    """True when `a` dominates `b` (reflexive)."""
    while True:
        if a == b:
            return True
        parent = idom.get(b)
        if parent is None or parent == b:
            return False
        b = parent
