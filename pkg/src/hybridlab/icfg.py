"""Interprocedural CFG, indirect-call resolution and label reachability."""
from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field

from .ir import ArrType, Program, Ret
from .labels import LabelSet
from .semantics import arith, bitwise, cast, compare, mask, shift

Node = tuple[str, str]
Site = tuple[str, str, int]

# value-set lattice: a frozenset of constants, or TOP
TOP = None
MAX_SET = 64


def _join(a, b):
    if a is TOP or b is TOP:
        return TOP
    u = a | b
    return TOP if len(u) > MAX_SET else u


def _lift(fn, *sets):
    if any(s is TOP for s in sets):
        return TOP
    out = set()
    if len(sets) == 1:
        out = {fn(x) for x in sets[0]}
    else:
        if len(sets[0]) * len(sets[1]) > MAX_SET * 4:
            return TOP
        out = {fn(x, y) for x in sets[0] for y in sets[1]}
    return frozenset(out) if len(out) <= MAX_SET else TOP


@dataclass
class InterCfg:
    nodes: list[Node]
    succ: dict[Node, list[Node]]
    icall_targets: dict[Site, tuple[str, ...]] = field(default_factory=dict)
    call_edges: set[tuple[Node, Node]] = field(default_factory=set)
    return_edges: set[tuple[Node, Node]] = field(default_factory=set)

    @property
    def edges(self) -> set[tuple[Node, Node]]:
        return {(a, b) for a, ss in self.succ.items() for b in ss}


class _ValueSets:
    """Flow-insensitive constant-set propagation across functions."""

    def __init__(self, p: Program):
        self.p = p
        self.env: dict[str, dict[str, object]] = {f.name: {} for f in p.functions}
        self.rets: dict[str, object] = {f.name: frozenset() for f in p.functions}
        entry = p.function(p.entry)
        for name, _ in entry.params:
            self.env[entry.name][name] = TOP

    def get(self, fn: str, a):
        if isinstance(a, int):
            return frozenset({a})
        return self.env[fn].get(a, frozenset())

    def put(self, fn: str, reg: str, vs) -> bool:
        old = self.env[fn].get(reg, frozenset())
        new = _join(old, vs)
        if new != old:
            self.env[fn][reg] = new
            return True
        return False

    def transfer(self, f, ins):
        g = lambda a: self.get(f.name, a)
        op, w = ins.op, ins.width
        if op == "const":
            return frozenset({ins.args[0]})
        if op in ("add", "sub", "mul", "div", "rem"):
            return _lift(lambda x, y: arith(op, ins.signed, w, x, y)[0], g(ins.args[0]), g(ins.args[1]))
        if op in ("shl", "lshr", "ashr"):
            return _lift(lambda x, y: shift(op, w, x, y)[0], g(ins.args[0]), g(ins.args[1]))
        if op in ("and", "or", "xor"):
            return _lift(lambda x, y: bitwise(op, x, y), g(ins.args[0]), g(ins.args[1]))
        if op in ("zext", "sext", "trunc"):
            sw = f.reg_types[ins.args[0]]
            return _lift(lambda x: cast(op, sw, w, x), g(ins.args[0]))
        if op == "cmp":
            regs = [a for a in ins.args if isinstance(a, str)]
            cw = f.reg_types[regs[0]]
            return _lift(lambda x, y: compare(ins.pred, cw, x, y), g(ins.args[0]), g(ins.args[1]))
        if op == "call":
            return self.rets[ins.callee]
        return TOP  # input reads, array loads, icall results


def build_inter_cfg(p: Program) -> InterCfg:
    """ICFG with icall targets resolved to a fixed point."""
    vs = _ValueSets(p)
    targets: dict[Site, frozenset[str]] = {}
    table = p.func_table

    def callees(f, b, k, ins):
        if ins.op == "call":
            return [ins.callee]
        return sorted(targets.get((f.name, b.label, k), frozenset()))

    changed = True
    while changed:
        changed = False
        for f in p.functions:
            for b in f.blocks:
                for k, ins in enumerate(b.instrs):
                    if ins.op == "icall":
                        idx = vs.get(f.name, ins.args[0])
                        tset = frozenset(table) if idx is TOP else frozenset(table[i] for i in idx if i < len(table))
                        if not tset <= targets.get((f.name, b.label, k), frozenset()):
                            targets[(f.name, b.label, k)] = targets.get((f.name, b.label, k), frozenset()) | tset
                            changed = True
                    if ins.op in ("call", "icall"):
                        args = ins.args if ins.op == "call" else ins.args[1:]
                        for cname in callees(f, b, k, ins):
                            callee = p.function(cname)
                            for (pname, _), a in zip(callee.params, args):
                                changed |= vs.put(cname, pname, vs.get(f.name, a))
                    if ins.dest is not None and not isinstance(f.reg_types.get(ins.dest), ArrType):
                        changed |= vs.put(f.name, ins.dest, vs.transfer(f, ins))
                if isinstance(b.term, Ret) and b.term.value is not None:
                    new = _join(vs.rets[f.name], vs.get(f.name, b.term.value))
                    if new != vs.rets[f.name]:
                        vs.rets[f.name] = new
                        changed = True

    nodes = p.nodes()
    succ: dict[Node, list[Node]] = {n: [] for n in nodes}
    cfg = InterCfg(nodes, succ, {s: tuple(sorted(t)) for s, t in targets.items()})
    for f in p.functions:
        for b in f.blocks:
            here = (f.name, b.label)
            out = [(f.name, s) for s in b.successors()]
            for k, ins in enumerate(b.instrs):
                if ins.op not in ("call", "icall"):
                    continue
                for cname in callees(f, b, k, ins):
                    callee = p.function(cname)
                    entry = (cname, callee.entry_block)
                    cfg.call_edges.add((here, entry))
                    out.append(entry)
                    for cb in callee.blocks:
                        if isinstance(cb.term, Ret):
                            ret = (cname, cb.label)
                            cfg.return_edges.add((ret, here))
                            if here not in succ[ret]:
                                succ[ret].append(here)
            for s in out:
                if s not in succ[here]:
                    succ[here].append(s)
    return cfg


# --------------------------------------------------------------------------
# reachability

def _sccs(nodes: list, succ: Mapping) -> list[list]:
    """Tarjan's algorithm, iterative; components in reverse topological order."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                elif w in on:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    x = stack.pop()
                    on.discard(x)
                    comp.append(x)
                    if x == v:
                        break
                out.append(comp)
    return out


def reach_sets(nodes: list[Hashable], succ: Mapping, node_labels: Mapping) -> dict:
    """Labels hosted in nodes reachable from each node via at least one edge.

    Works on any graph; bitsets over label ids keep unions cheap.
    """
    ids = sorted({l for ls in node_labels.values() for l in ls})
    bit = {l: 1 << k for k, l in enumerate(ids)}
    own = {n: sum(bit[l] for l in set(node_labels.get(n, ()))) for n in nodes}
    comp_of, reach = {}, {}
    for ci, comp in enumerate(_sccs(nodes, succ)):
        members = set(comp)
        for n in comp:
            comp_of[n] = ci
        acc = 0
        cyclic = len(comp) > 1 or any(n in succ.get(n, ()) for n in comp)
        for n in comp:
            for s in succ.get(n, ()):
                if s not in members:
                    acc |= reach[s] | own[s]
        if cyclic:
            for n in comp:
                acc |= own[n]
        for n in comp:
            reach[n] = acc
    return {n: frozenset(l for l in ids if reach[n] & bit[l]) for n in nodes}


@dataclass(frozen=True)
class ReachTable:
    sets: dict[Node, frozenset[int]]
    own: dict[Node, frozenset[int]]

    def count(self, node: Node) -> int:
        return len(self.sets.get(node, ()))

    def labels(self, node: Node) -> frozenset[int]:
        return self.sets.get(node, frozenset())

    def anchor_count(self, node: Node) -> int:
        """Labels reachable from `node` or hosted in it."""
        return len(self.sets.get(node, frozenset()) | self.own.get(node, frozenset()))


def compute_reach(cfg: InterCfg, ls: LabelSet) -> ReachTable:
    own: dict[Node, set[int]] = {}
    for l in ls.live():
        own.setdefault((l.function, l.block), set()).add(l.id)
    sets = reach_sets(cfg.nodes, cfg.succ, own)
    return ReachTable(sets, {n: frozenset(v) for n, v in own.items()})


def format_reach(table: ReachTable, nodes: Iterable[Node]) -> str:
    return "".join(f"{f}:{b} {table.count((f, b))}\n" for f, b in sorted(nodes))
