"""Deterministic concrete execution of IR programs.

Programs are translated once into Python functions (one per IR function)
and cached per (program, live label set); every run then only pays for the
generated code. Violations never abort a run: arithmetic wraps, an
out-of-bounds load yields 0, an out-of-bounds store is dropped and an
oversized shift uses the amount masked to width-1.
"""
from __future__ import annotations

import weakref
from collections import Counter
from dataclasses import dataclass, field

from .ir import BOOL, ArrType, Br, Function, Jmp, Program, Ret
from .labels import LabelSet
from .semantics import mask, trunc_div

DEFAULT_BUDGET = 1_000_000
DEFAULT_MAX_DEPTH = 64

OK = "ok"
BUDGET_EXHAUSTED = "budget"
DEPTH_EXCEEDED = "depth"


class _Budget(Exception):
    pass


class _Depth(Exception):
    pass


@dataclass
class ExecTrace:
    """Result of one concrete run.

    ``block_seq`` holds node ids (indices into ``Program.nodes()``); a call
    appends the callee's entry block and the return appends the caller's
    block again, so every consecutive pair is one edge.
    """

    block_seq: list[int]
    labels_reached: set[int]
    violations: list[tuple[int, tuple]]
    ret_code: int | None
    instr_count: int
    status: str = OK
    icall_faults: list[tuple] = field(default_factory=list)
    icall_log: list[tuple] = field(default_factory=list)

    @property
    def exhausted(self) -> bool:
        return self.status == BUDGET_EXHAUSTED

    def edge_hits(self) -> Counter:
        s = self.block_seq
        return Counter(zip(s, s[1:]))

    def violated_ids(self) -> set[int]:
        return {v[0] for v in self.violations}

    def path_key(self) -> tuple:
        return tuple(self.block_seq)


class _State:
    __slots__ = ("d", "seq", "reached", "viols", "n", "faults", "icalls")

    def __init__(self, data: bytes):
        self.d = data
        self.seq = []
        self.reached = set()
        self.viols = []
        self.n = 0
        self.faults = []
        self.icalls = []


def _sdivrem(op, a, b, w):
    h = 1 << (w - 1)
    sa, sb = (a ^ h) - h, (b ^ h) - h
    if sb == 0:
        return 0, False
    q = trunc_div(sa, sb)
    r = q if op == "div" else sa - q * sb
    return r & ((1 << w) - 1), not -h <= r < h


class _Codegen:
    def __init__(self, p: Program, labels: LabelSet, max_depth: int):
        self.p = p
        self.max_depth = max_depth
        self.node_ids = p.node_index()
        self.live = {l.site: l.id for l in labels.live()}
        self.names = {f.name: f"F{k}" for k, f in enumerate(p.functions)}
        self.lines: list[str] = []

    def emit(self, indent: int, text: str):
        self.lines.append("    " * indent + text)

    def build(self) -> str:
        for f in self.p.functions:
            self.function(f)
        return "\n".join(self.lines) + "\n"

    def function(self, f: Function):
        regs = {r: f"r{k}" for k, r in enumerate(f.reg_types)}
        self.regs = regs
        self.f = f
        params = "".join(f", {regs[n]}" for n, _ in f.params)
        self.emit(0, f"def {self.fname(f.name)}(st, depth{params}):")
        self.emit(1, f"if depth > {self.max_depth}:")
        self.emit(2, "raise _Depth")
        self.emit(1, "d = st.d")
        self.emit(1, "app = st.seq.append")
        self.emit(1, "reach = st.reached.add")
        self.emit(1, "viol = st.viols.append")
        self.emit(1, "n = st.n")
        self.emit(1, f"blk = {self.node_ids[(f.name, f.entry_block)]}")
        self.emit(1, "while True:")
        for k, b in enumerate(f.blocks):
            nid = self.node_ids[(f.name, b.label)]
            self.emit(2, f"{'if' if k == 0 else 'elif'} blk == {nid}:")
            cost = len(b.instrs) + 1
            self.emit(3, f"n += {cost}")
            self.emit(3, "if n > BUDGET:")
            self.emit(4, f"st.n = n - {cost}")
            self.emit(4, "raise _Budget")
            self.emit(3, f"app({nid})")
            for idx, ins in enumerate(b.instrs):
                self.instr(b.label, idx, ins, nid)
            self.term(b.term)
        self.emit(0, "")

    def fname(self, name: str) -> str:
        return self.names[name]

    def v(self, a) -> str:
        return str(a) if isinstance(a, int) else self.regs[a]

    def width_of(self, a, default):
        if isinstance(a, int):
            return default
        return self.f.reg_types[a]

    def instr(self, blk, idx, ins, nid):
        e = lambda s: self.emit(3, s)
        op = ins.op
        d = self.regs.get(ins.dest) if ins.dest else None
        lid = self.live.get((self.f.name, blk, idx))
        a = [self.v(x) for x in ins.args]
        w = ins.width
        if op == "const":
            e(f"{d} = {ins.args[0]}")
        elif op == "in":
            o = ins.args[0]
            parts = [f"d[{o}]"] + [f"(d[{o + k}] << {8 * k})" for k in range(1, w // 8)]
            e(f"{d} = {' | '.join(parts)}")
        elif op in ("add", "sub", "mul"):
            sym = {"add": "+", "sub": "-", "mul": "*"}[op]
            m = mask(w)
            if lid is None:
                e(f"{d} = ({a[0]} {sym} {a[1]}) & {m}")
            else:
                e(f"reach({lid})")
                if ins.signed:
                    h = 1 << (w - 1)
                    e(f"_t = (({a[0]} ^ {h}) - {h}) {sym} (({a[1]} ^ {h}) - {h})")
                    e(f"if _t < {-h} or _t >= {h}:")
                else:
                    e(f"_t = {a[0]} {sym} {a[1]}")
                    e(f"if _t < 0 or _t > {m}:")
                self.emit(4, f"viol(({lid}, ({a[0]}, {a[1]})))")
                e(f"{d} = _t & {m}")
        elif op in ("div", "rem"):
            if lid is not None:
                e(f"reach({lid})")
            if ins.signed:
                e(f"_t, _o = _sdivrem({op!r}, {a[0]}, {a[1]}, {w})")
                if lid is not None:
                    e("if _o:")
                    self.emit(4, f"viol(({lid}, ({a[0]}, {a[1]})))")
                e(f"{d} = _t")
            else:
                pyop = "//" if op == "div" else "%"
                e(f"{d} = ({a[0]} {pyop} {a[1]}) if {a[1]} else 0")
        elif op in ("shl", "lshr", "ashr"):
            m, h = mask(w), 1 << (w - 1)
            if lid is not None:
                e(f"reach({lid})")
                e(f"_s = ({a[1]} ^ {h}) - {h}")
                e(f"if _s < 0 or _s >= {w}:")
                self.emit(4, f"viol(({lid}, ({a[0]}, {a[1]})))")
            k = f"({a[1]} & {w - 1})"
            if op == "shl":
                e(f"{d} = ({a[0]} << {k}) & {m}")
            elif op == "lshr":
                e(f"{d} = {a[0]} >> {k}")
            else:
                e(f"{d} = ((({a[0]} ^ {h}) - {h}) >> {k}) & {m}")
        elif op in ("and", "or", "xor"):
            sym = {"and": "&", "or": "|", "xor": "^"}[op]
            e(f"{d} = {a[0]} {sym} {a[1]}")
        elif op == "zext":
            e(f"{d} = {a[0]}")
        elif op == "sext":
            sw = self.f.reg_types[ins.args[0]]
            h = 1 << (sw - 1)
            e(f"{d} = (({a[0]} ^ {h}) - {h}) & {mask(w)}")
        elif op == "trunc":
            e(f"{d} = {a[0]} & {mask(w)}")
        elif op == "cmp":
            pred = ins.pred
            cw = next(self.f.reg_types[x] for x in ins.args if isinstance(x, str))
            if pred in ("slt", "sle"):
                h = 1 << (cw - 1)
                rel = "<" if pred == "slt" else "<="
                e(f"{d} = 1 if ({a[0]} ^ {h}) {rel} ({a[1]} ^ {h}) else 0")
            else:
                rel = {"eq": "==", "ne": "!=", "ult": "<", "ule": "<="}[pred]
                e(f"{d} = 1 if {a[0]} {rel} {a[1]} else 0")
        elif op == "arr.alloc":
            e(f"{d} = [0] * {ins.args[0]}")
        elif op in ("arr.load", "arr.store"):
            at: ArrType = self.f.reg_types[ins.args[0]]
            iw = self.width_of(ins.args[1], 32)
            h = 1 << (iw - 1)
            e(f"_i = ({a[1]} ^ {h}) - {h}")
            if lid is not None:
                e(f"reach({lid})")
            e(f"if 0 <= _i < {at.size}:")
            if op == "arr.load":
                self.emit(4, f"{d} = {a[0]}[_i]")
            else:
                self.emit(4, f"{a[0]}[_i] = {a[2]}")
            e("else:")
            if lid is not None:
                self.emit(4, f"viol(({lid}, ({a[1]},)))")
            if op == "arr.load":
                self.emit(4, f"{d} = 0")
            else:
                self.emit(4, "pass")
        elif op == "call":
            callee = self.fname(ins.callee)
            args = "".join(f", {x}" for x in a)
            e("st.n = n")
            call = f"{callee}(st, depth + 1{args})"
            e(f"{d} = {call}" if d else call)
            e("n = st.n")
            e(f"app({nid})")
        elif op == "icall":
            args = "".join(f", {x}" for x in a[1:])
            site = (self.f.name, blk, idx)
            e(f"_k = {a[0]}")
            e(f"if _k < {len(self.p.func_table)}:")
            self.emit(4, f"st.icalls.append(({site!r}, _k))")
            self.emit(4, "st.n = n")
            call = f"TABLE[_k](st, depth + 1{args})"
            self.emit(4, f"{d} = {call}" if d else call)
            self.emit(4, "n = st.n")
            self.emit(4, f"app({nid})")
            e("else:")
            self.emit(4, f"st.faults.append(({site!r}, _k))")
            if d:
                self.emit(4, f"{d} = 0")
        else:
            raise ValueError(f"cannot compile {op}")

    def term(self, t):
        f = self.f
        ids = self.node_ids
        if isinstance(t, Jmp):
            self.emit(3, f"blk = {ids[(f.name, t.target)]}")
        elif isinstance(t, Br):
            self.emit(3, f"blk = {ids[(f.name, t.then)]} if {self.regs[t.cond]} else {ids[(f.name, t.other)]}")
        else:
            self.emit(3, "st.n = n")
            self.emit(3, f"return {self.v(t.value) if t.value is not None else 'None'}")


class Executor:
    """Compiled form of a program for one label set."""

    def __init__(self, p: Program, labels: LabelSet | None = None, budget: int = DEFAULT_BUDGET,
                 max_depth: int = DEFAULT_MAX_DEPTH):
        self.program = p
        self.labels = labels if labels is not None else LabelSet()
        self.budget = budget
        self.nodes = p.nodes()
        gen = _Codegen(p, self.labels, max_depth)
        self.source = gen.build()
        env = {"_Budget": _Budget, "_Depth": _Depth, "_sdivrem": _sdivrem, "BUDGET": budget}
        exec(compile(self.source, f"<ir:{p.entry}>", "exec"), env)
        env["TABLE"] = [env[gen.fname(n)] for n in p.func_table]
        self._entry = env[gen.fname(p.entry)]
        self._entry_params = len(p.function(p.entry).params)
        self.input_len = p.input_len

    def run(self, data: bytes) -> ExecTrace:
        if len(data) > self.input_len:
            raise ValueError(f"input of {len(data)} bytes exceeds input length {self.input_len}")
        if len(data) < self.input_len:
            data = bytes(data) + bytes(self.input_len - len(data))
        st = _State(data)
        status, ret = OK, None
        try:
            ret = self._entry(st, 1, *([0] * self._entry_params))
        except _Budget:
            status = BUDGET_EXHAUSTED
        except _Depth:
            status = DEPTH_EXCEEDED
        return ExecTrace(st.seq, st.reached, st.viols, ret, st.n, status, st.faults, st.icalls)

    def node_name(self, nid: int) -> tuple[str, str]:
        return self.nodes[nid]

    def edge_name(self, edge: tuple[int, int]) -> tuple[str, str, str, str]:
        (sf, sb), (df, db) = self.nodes[edge[0]], self.nodes[edge[1]]
        return (sf, sb, df, db)


_CACHE: "weakref.WeakKeyDictionary[Program, dict]" = weakref.WeakKeyDictionary()


def executor_for(p: Program, labels: LabelSet | None = None, budget: int = DEFAULT_BUDGET) -> Executor:
    key = (labels.live_ids() if labels is not None else frozenset(), budget)
    per = _CACHE.setdefault(p, {})
    ex = per.get(key)
    if ex is None:
        ex = per[key] = Executor(p, labels, budget)
    return ex


def run_concrete(p: Program, labels: LabelSet | None, data: bytes, budget: int = DEFAULT_BUDGET) -> ExecTrace:
    """Execute `p` on `data` (zero-extended to the input length)."""
    return executor_for(p, labels, budget).run(data)
