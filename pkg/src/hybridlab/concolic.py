"""Concolic replay of one seed: path condition, branch flips, label verification.

The engine follows the seed's concrete path exactly, carrying a symbolic
shadow for every input-dependent value. Queries are collected during the
replay and served afterwards, verification before flips, until the unit
budget runs out. One unit is one interpreted instruction; solver work is
charged at ``solver_unit`` candidate evaluations per unit.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import symexpr as sx
from .interp import DEFAULT_BUDGET, DEFAULT_MAX_DEPTH, run_concrete
from .ir import Br, Jmp, Program
from .labels import LabelSet
from .semantics import arith, cast, compare, mask, shift, to_signed
from .solver import SAT, UNSAT, SolveResult, solve

FULL = "full"
OPTIMISTIC = "optimistic"

Site = tuple[str, str]  # (function, block) of a conditional branch


@dataclass
class ConcolicConfig:
    exhaustive_cap: int = 2
    search_budget: int = 2000
    solver_unit: int = 64
    max_depth: int = DEFAULT_MAX_DEPTH
    check_shadow: bool = False


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    data: bytes
    kind: str  # "flip" or "verify"
    site: Site | None = None
    direction: bool | None = None  # arm the case should take
    seq_index: int | None = None  # position of the branch block in block_seq
    label_id: int | None = None
    mode: str | None = None
    support: frozenset[int] = frozenset()


@dataclass(frozen=True)
class VerificationOutcome:
    label_id: int
    mode: str
    result: SolveResult
    triggered: bool
    witness: bytes | None = None
    seq_index: int | None = None  # position of the label's block in block_seq


@dataclass
class ConcolicResult:
    cases: list[TestCase] = field(default_factory=list)
    verifications: list[VerificationOutcome] = field(default_factory=list)
    attempted: list[tuple[Site, bool]] = field(default_factory=list)
    block_seq: list[int] = field(default_factory=list)
    path_condition: list[tuple] = field(default_factory=list)
    units: int = 0
    exhausted: bool = False

    @property
    def triggered(self) -> dict[int, bytes]:
        return {v.label_id: v.witness for v in self.verifications if v.triggered}


class _OutOfUnits(Exception):
    pass


class _Frame:
    __slots__ = ("fn", "regs", "block", "pc", "dest")

    def __init__(self, fn, regs, block, dest):
        self.fn = fn
        self.regs = regs
        self.block = block
        self.pc = 0
        self.dest = dest


def _sym(v, width):
    conc, s = v
    return s if s is not None else sx.const(conc, width)


class ConcolicEngine:
    """Reusable executor; per-seed state lives only inside `run`."""

    def __init__(self, p: Program, labels: LabelSet, config: ConcolicConfig | None = None):
        self.p = p
        self.labels = labels
        self.cfg = config or ConcolicConfig()
        self.node_ids = p.node_index()
        self.live_sites = {l.site: l for l in labels.live()}
        self.reset()

    # per-seed state ----------------------------------------------------

    def reset(self) -> None:
        self.pc: list[sx.Sym] = []
        self.pins: set[int] = set()  # pc positions that only concretize an address
        self.flips: list[tuple] = []
        self.checks: list[tuple] = []
        self.attempted: list[tuple[Site, bool]] = []
        self.seq: list[int] = []
        self.units = 0
        self.limit = 0
        self._seen_flip: set = set()
        self._seen_label: dict[int, int] = {}  # label id -> index in checks

    def state_size(self) -> int:
        return (len(self.pc) + len(self.pins) + len(self.flips) + len(self.checks) + len(self.attempted) + len(self.seq)
                + len(self._seen_flip) + len(self._seen_label))

    def _charge(self, n: int) -> None:
        self.units += n
        if self.units > self.limit:
            raise _OutOfUnits

    # interpretation ----------------------------------------------------

    def run(self, seed: bytes, covered, timeout_units: int, triggered=frozenset(),
            rng: random.Random | None = None) -> ConcolicResult:
        """Replay `seed`; `covered` answers ``(src_node, dst_node) in covered``."""
        self.reset()
        self.limit = timeout_units
        L = self.p.input_len
        data = bytes(seed) + bytes(max(0, L - len(seed)))
        self.data = data
        self.covered = covered
        self.triggered = set(triggered)
        out = ConcolicResult()
        try:
            self._interpret(data)
        except _OutOfUnits:
            out.exhausted = True
        out.block_seq = list(self.seq)
        out.path_condition = [(i, c) for i, c in enumerate(self.pc)]
        if not out.exhausted:
            try:
                self._serve(data, out, rng)
            except _OutOfUnits:
                out.exhausted = True
        out.attempted = list(self.attempted)
        out.units = self.units
        self.data = None
        self.covered = None
        return out

    def _interpret(self, d: bytes) -> None:
        p = self.p
        entry = p.function(p.entry)
        regs = {name: (0, None) for name, _ in entry.params}
        stack = [_Frame(entry, regs, entry.entry_block, None)]
        self.seq.append(self.node_ids[(entry.name, entry.entry_block)])
        steps = 0
        while stack:
            fr = stack[-1]
            f = fr.fn
            blk = f.block(fr.block)
            if fr.pc < len(blk.instrs):
                ins = blk.instrs[fr.pc]
                fr.pc += 1
                steps += 1
                if steps > DEFAULT_BUDGET:
                    raise _OutOfUnits
                self._charge(1)
                if ins.op in ("call", "icall"):
                    callee, args = self._resolve_call(fr, blk, ins)
                    if callee is None:
                        if ins.dest:
                            fr.regs[ins.dest] = (0, None)
                        continue
                    if len(stack) >= self.cfg.max_depth:
                        raise _OutOfUnits
                    cregs = {name: a for (name, _), a in zip(callee.params, args)}
                    stack.append(_Frame(callee, cregs, callee.entry_block, ins.dest))
                    self.seq.append(self.node_ids[(callee.name, callee.entry_block)])
                    continue
                self._exec(fr, blk, fr.pc - 1, ins)
                continue
            self._charge(1)
            t = blk.term
            if isinstance(t, Jmp):
                fr.block, fr.pc = t.target, 0
                self.seq.append(self.node_ids[(f.name, t.target)])
            elif isinstance(t, Br):
                conc, s = fr.regs[t.cond]
                taken = bool(conc)
                nxt = t.then if taken else t.other
                self._branch(f, blk, t, taken, s)
                fr.block, fr.pc = nxt, 0
                self.seq.append(self.node_ids[(f.name, nxt)])
            else:
                val = (0, None)
                if t.value is not None:
                    val = self._val(fr, t.value, f.ret_width or 32)
                stack.pop()
                if stack:
                    caller = stack[-1]
                    if fr.dest:
                        caller.regs[fr.dest] = val
                    self.seq.append(self.node_ids[(caller.fn.name, caller.block)])

    def _branch(self, f, blk, t: Br, taken: bool, s) -> None:
        site = (f.name, blk.label)
        here = self.node_ids[site]
        other = t.other if taken else t.then
        if t.then != t.other and (here, self.node_ids[(f.name, other)]) not in self.covered:
            key = (site, not taken)
            if key not in self._seen_flip:
                self._seen_flip.add(key)
                self.attempted.append(key)
                if s is not None:
                    want = sx.bool_not(s) if taken else s
                    self.flips.append((site, not taken, len(self.pc), want, len(self.seq) - 1))
        if s is not None:
            self.pc.append(s if taken else sx.bool_not(s))

    def _resolve_call(self, fr, blk, ins):
        p = self.p
        f = fr.fn
        if ins.op == "call":
            callee = p.function(ins.callee)
            raw = ins.args
        else:
            k = self._val(fr, ins.args[0], 32)
            if k[1] is not None:
                self._pin(k[1], k[0])
            if k[0] >= len(p.func_table):
                return None, ()
            callee = p.function(p.func_table[k[0]])
            raw = ins.args[1:]
        args = [self._val(fr, a, w) for a, (_, w) in zip(raw, callee.params)]
        return callee, args

    def _val(self, fr, a, width):
        if isinstance(a, int):
            return (a, None)
        return fr.regs[a]

    def _label_check(self, site, operands) -> None:
        """Queue one verification per label per run, at its first visit.

        A later visit that concretely violates the label replaces the
        queued check, so a seed that already triggers is never missed.
        """
        lab = self.live_sites.get(site)
        if lab is None or lab.id in self.triggered:
            return
        cond = lab.condition
        holds = cond.holds(*(v[0] for v in operands))
        pos = self._seen_label.get(lab.id)
        if pos is not None and (not holds or self.checks[pos][3]):
            return
        syms = [_sym(v, cond.width) for v in operands]
        entry = (lab.id, len(self.pc), cond.instantiate(*syms), holds, len(self.seq) - 1)
        if pos is None:
            self._seen_label[lab.id] = len(self.checks)
            self.checks.append(entry)
        else:
            self.checks[pos] = entry

    def _exec(self, fr, blk, idx, ins) -> None:
        f = fr.fn
        regs = fr.regs
        op, w = ins.op, ins.width
        site = (f.name, blk.label, idx)

        def val(a):
            return (a, None) if isinstance(a, int) else regs[a]

        if op == "const":
            res = (ins.args[0], None)
        elif op == "in":
            off = ins.args[0]
            nb = w // 8
            conc = int.from_bytes(self.data[off:off + nb], "little")
            res = (conc, sx.concat_bytes(off, nb))
        elif op in ("add", "sub", "mul", "div", "rem"):
            a, b = val(ins.args[0]), val(ins.args[1])
            self._label_check(site, (a, b))
            conc = arith(op, ins.signed, w, a[0], b[0])[0]
            sop = op if op in ("add", "sub", "mul") else ("s" if ins.signed else "u") + op
            res = (conc, self._mk(sop, w, a, b))
        elif op in ("shl", "lshr", "ashr"):
            a, b = val(ins.args[0]), val(ins.args[1])
            self._label_check(site, (a, b))
            res = (shift(op, w, a[0], b[0])[0], self._mk(op, w, a, b))
        elif op in ("and", "or", "xor"):
            a, b = val(ins.args[0]), val(ins.args[1])
            conc = a[0] & b[0] if op == "and" else a[0] | b[0] if op == "or" else a[0] ^ b[0]
            res = (conc, self._mk(op, w, a, b))
        elif op in ("zext", "sext", "trunc"):
            a = val(ins.args[0])
            sw = f.reg_types[ins.args[0]]
            s = None
            if a[1] is not None:
                s = {"zext": sx.zext, "sext": sx.sext, "trunc": sx.trunc}[op](a[1], w)
            res = (cast(op, sw, w, a[0]), s)
        elif op == "cmp":
            a, b = val(ins.args[0]), val(ins.args[1])
            cw = next(f.reg_types[r] for r in ins.args if isinstance(r, str))
            s = None
            if a[1] is not None or b[1] is not None:
                s = sx.cmp(ins.pred, _sym(a, cw), _sym(b, cw))
                if s.is_const:
                    s = None
            res = (compare(ins.pred, cw, a[0], b[0]), s)
        elif op == "arr.alloc":
            res = [(0, None)] * ins.args[0]
        elif op in ("arr.load", "arr.store"):
            arr = regs[ins.args[0]]
            iarg = ins.args[1]
            iw = 32 if isinstance(iarg, int) else f.reg_types[iarg]
            i = val(iarg)
            self._label_check(site, (i,))
            if i[1] is not None:
                # concretize the address; the label condition above kept the symbol
                self._pin(i[1], i[0])
            k = to_signed(i[0], iw)
            inb = 0 <= k < len(arr)
            if op == "arr.load":
                res = arr[k] if inb else (0, None)
            else:
                if inb:
                    arr[k] = val(ins.args[2])
                return
        else:
            raise ValueError(f"unexpected op {op}")
        if self.cfg.check_shadow and op not in ("arr.alloc",) and res[1] is not None:
            got = sx.evaluate(res[1], self.data)
            if got != res[0]:
                raise AssertionError(f"shadow mismatch at {site}: {got} != {res[0]}")
        regs[ins.dest] = res

    @staticmethod
    def _mk(op, w, a, b):
        if a[1] is None and b[1] is None:
            return None
        s = sx.mk(op, w, _sym(a, w), _sym(b, w))
        return None if s.is_const else s

    def _pin(self, expr, value) -> None:
        """Concretize `expr` to the seed's value for the rest of the path."""
        self.pins.add(len(self.pc))
        self.pc.append(sx.cmp("eq", expr, sx.const(value, expr.width)))

    # query serving -----------------------------------------------------

    def _solve(self, cons, data, rng) -> SolveResult:
        remaining = self.limit - self.units
        budget = max(1, min(self.cfg.search_budget, remaining * self.cfg.solver_unit))
        r = solve(cons, self.p.input_len, data, exhaustive_cap=self.cfg.exhaustive_cap,
                  search_budget=budget, rng=rng)
        self._charge(1 + r.work // self.cfg.solver_unit)
        return r

    def _serve(self, data: bytes, out: ConcolicResult, rng) -> None:
        rng = rng or random.Random(0)
        for lid, k, expr, already, at in self.checks:
            if already:
                # the seed itself violates the label on this path
                r = SolveResult(SAT, data, sx.support(expr), 0)
                out.verifications.append(VerificationOutcome(lid, FULL, r, True, data, at))
                continue
            r = self._solve(self.pc[:k] + [expr], data, rng)
            if r.status == UNSAT and any(i < k for i in self.pins):
                # pins only fix addresses; UNSAT must hold for every input on this path
                loose = [c for i, c in enumerate(self.pc[:k]) if i not in self.pins]
                r = self._solve(loose + [expr], data, rng)
            mode = FULL
            if r.status != SAT:
                out.verifications.append(VerificationOutcome(lid, FULL, r, False, None, at))
                r = self._solve([expr], data, rng)
                mode = OPTIMISTIC
            if r.status != SAT:
                if mode == OPTIMISTIC:
                    out.verifications.append(VerificationOutcome(lid, OPTIMISTIC, r, False, None, at))
                continue
            wit = self._splice(data, r)
            hit = lid in run_concrete(self.p, self.labels, wit).violated_ids()
            out.verifications.append(VerificationOutcome(lid, mode, r, hit, wit if hit else None, at))
            out.cases.append(TestCase(wit, "verify", label_id=lid, mode=mode, support=r.support))
        for site, direction, k, want, seq_index in self.flips:
            r = self._solve(self.pc[:k] + [want], data, rng)
            if r.status == SAT:
                out.cases.append(TestCase(self._splice(data, r), "flip", site, direction, seq_index,
                                          support=r.support))

    @staticmethod
    def _splice(data: bytes, r: SolveResult) -> bytes:
        """Witness bytes on the solved support, seed bytes everywhere else."""
        out = bytearray(data)
        for o in r.support:
            out[o] = r.witness[o]
        return bytes(out)


def run_concolic(p: Program, labels: LabelSet, covered, seed: bytes, timeout_units: int,
                 triggered=frozenset(), config: ConcolicConfig | None = None) -> ConcolicResult:
    return ConcolicEngine(p, labels, config).run(seed, covered, timeout_units, triggered)
