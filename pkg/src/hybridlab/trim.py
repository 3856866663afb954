"""Static removal of labels that a dominating constant guard rules out.

A live label is trimmed only when all three hold:

1. its block's immediate dominator is its only predecessor and ends in a
   conditional branch with exactly one arm leading to the label's block;
2. the registers of the trigger condition are not redefined between the
   guard's comparison and the label (one zext/sext/trunc of the guarded
   register is allowed as the only definition);
3. the interval implied by the guard (a comparison against a constant)
   makes the trigger condition impossible.

Anything the interval reasoning cannot decide keeps the label live.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dominators import compute_dominators
from .ir import Br, Function, Instr, Program, format_instr
from .labels import OOB, SHIFT, BugLabel, LabelSet
from .semantics import mask, to_signed


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int
    width: int
    signed: bool = False

    @classmethod
    def top(cls, width: int) -> "Interval":
        return cls(0, mask(width), width)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def as_unsigned(self) -> "Interval":
        if not self.signed:
            return self
        if self.lo >= 0:
            return Interval(self.lo, self.hi, self.width)
        if self.hi < 0:
            return Interval(self.lo + (1 << self.width), self.hi + (1 << self.width), self.width)
        return Interval.top(self.width)

    def as_signed(self) -> "Interval":
        if self.signed:
            return self
        half = 1 << (self.width - 1)
        if self.hi < half:
            return Interval(self.lo, self.hi, self.width, True)
        if self.lo >= half:
            return Interval(self.lo - (1 << self.width), self.hi - (1 << self.width), self.width, True)
        return Interval(-half, half - 1, self.width, True)

    def __str__(self):
        return f"[{self.lo},{self.hi}]{'s' if self.signed else 'u'}{self.width}"


@dataclass(frozen=True)
class TrimEvidence:
    parent: str
    guard: str
    direction: bool
    bounds: tuple

    def __str__(self):
        b = " ".join(f"{r}in{iv}" for r, iv in self.bounds)
        return f"idom={self.parent} guard='{self.guard}'={'T' if self.direction else 'F'} {b}"


@dataclass
class TrimReport:
    total: int
    trimmed: dict[int, TrimEvidence] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return len(self.trimmed) / self.total if self.total else 0.0


_NEGATE = {"lt": "ge", "le": "gt", "gt": "le", "ge": "lt", "eq": "ne", "ne": "eq"}
_MIRROR = {"lt": "gt", "le": "ge", "gt": "lt", "ge": "le", "eq": "eq", "ne": "ne"}


def guard_interval(ins: Instr, width: int, taken: bool):
    """(register, Interval) implied by `ins` evaluating to `taken`, or None."""
    a, b = ins.args
    if isinstance(a, str) and isinstance(b, int):
        reg, k, flip = a, b, False
    elif isinstance(b, str) and isinstance(a, int):
        reg, k, flip = b, a, True
    else:
        return None
    pred = ins.pred
    signed = pred in ("slt", "sle")
    rel = {"eq": "eq", "ne": "ne", "slt": "lt", "ult": "lt", "sle": "le", "ule": "le"}[pred]
    if flip:
        rel = _MIRROR[rel]
    if not taken:
        rel = _NEGATE[rel]
    if signed:
        lo, hi, kv = -(1 << (width - 1)), (1 << (width - 1)) - 1, to_signed(k, width)
    else:
        lo, hi, kv = 0, mask(width), k
    if rel == "eq":
        lo = hi = kv
    elif rel == "lt":
        hi = kv - 1
    elif rel == "le":
        hi = kv
    elif rel == "gt":
        lo = kv + 1
    elif rel == "ge":
        lo = kv
    else:
        return None
    return reg, Interval(lo, hi, width, signed)


def cast_interval(op: str, iv: Interval, width: int) -> Interval:
    if iv.empty:
        return Interval(1, 0, width)
    if op == "zext":
        u = iv.as_unsigned()
        return Interval(u.lo, u.hi, width)
    if op == "sext":
        s = iv.as_signed()
        return Interval(s.lo, s.hi, width, True)
    u = iv.as_unsigned()
    if u.hi <= mask(width):
        return Interval(u.lo, u.hi, width)
    return Interval.top(width)


def condition_impossible(label: BugLabel, ivs: list[Interval]) -> bool:
    """True when no operand values within `ivs` satisfy the trigger."""
    if any(iv.empty for iv in ivs):
        return True
    c = label.condition
    n = c.width
    if label.family == OOB:
        s = ivs[0].as_signed()
        return s.lo >= 0 and s.hi <= c.size - 1
    if label.family == SHIFT:
        s = ivs[1].as_signed()
        return s.lo >= 0 and s.hi <= n - 1
    op = c.op
    if c.signed:
        x, y = ivs[0].as_signed(), ivs[1].as_signed()
        lo_lim, hi_lim = -(1 << (n - 1)), (1 << (n - 1)) - 1
        if op == "add":
            lo, hi = x.lo + y.lo, x.hi + y.hi
        elif op == "sub":
            lo, hi = x.lo - y.hi, x.hi - y.lo
        elif op == "mul":
            corners = [x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi]
            lo, hi = min(corners), max(corners)
        elif op == "div":
            return not (x.lo <= lo_lim <= x.hi and y.lo <= -1 <= y.hi)
        else:
            return True
        return lo_lim <= lo and hi <= hi_lim
    x, y = ivs[0].as_unsigned(), ivs[1].as_unsigned()
    if op == "add":
        return x.hi + y.hi <= mask(n)
    if op == "sub":
        return x.lo >= y.hi
    if op == "mul":
        return x.hi * y.hi <= mask(n)
    return True


def _defs(instrs, reg) -> list[int]:
    return [k for k, ins in enumerate(instrs) if ins.dest == reg]


def _operand_interval(f: Function, reg: str) -> Interval:
    return Interval.top(f.reg_types[reg])


def try_trim(f: Function, label: BugLabel, idom: dict, preds: dict) -> TrimEvidence | None:
    blk = label.block
    if blk == f.entry_block:
        return None
    parent = idom.get(blk)
    if parent is None or parent == blk or preds[blk] != [parent]:
        return None
    pb = f.block(parent)
    term = pb.term
    if not isinstance(term, Br) or term.then == term.other:
        return None
    taken = term.then == blk
    cdefs = _defs(pb.instrs, term.cond)
    if not cdefs:
        return None
    k = cdefs[-1]
    guard = pb.instrs[k]
    if guard.op != "cmp":
        return None
    regs = [a for a in guard.args if isinstance(a, str)]
    if len(regs) != 1:
        return None
    width = f.reg_types[regs[0]]
    g = guard_interval(guard, width, taken)
    if g is None:
        return None
    reg, giv = g
    if _defs(pb.instrs[k + 1:], reg):
        return None
    before = f.block(blk).instrs[: label.index]
    cond = label.condition
    involved = cond.registers()
    tied = False
    bounds = {}
    for x in involved:
        xdefs = _defs(before, x)
        if x == reg:
            if xdefs:
                return None
            bounds[x] = giv
            tied = True
        elif xdefs:
            j = xdefs[0]
            src = before[j]
            if len(xdefs) != 1 or src.op not in ("zext", "sext", "trunc") or src.args[0] != reg:
                return None
            if _defs(before[:j], reg):
                return None
            bounds[x] = cast_interval(src.op, giv, src.width)
            tied = True
    if not tied:
        return None
    ivs = []
    for a in cond.operands:
        if isinstance(a, str) and a in bounds:
            ivs.append(bounds[a])
        elif isinstance(a, int):
            ivs.append(Interval(a, a, cond.width))
        else:
            ivs.append(_operand_interval(f, a))
    if label.family == SHIFT:
        ivs = [Interval.top(cond.width)] + ivs[1:]
    if not condition_impossible(label, ivs):
        return None
    return TrimEvidence(parent, format_instr(guard), taken, tuple(sorted((r, str(iv)) for r, iv in bounds.items())))


def trim_labels(p: Program, ls: LabelSet) -> tuple[LabelSet, TrimReport]:
    report = TrimReport(total=len(ls))
    for f in p.functions:
        mine = [l for l in ls if l.live and l.function == f.name]
        if not mine:
            continue
        idom = compute_dominators(f)
        preds = f.predecessors()
        for label in mine:
            ev = try_trim(f, label, idom, preds)
            if ev is not None:
                report.trimmed[label.id] = ev
    return ls.with_trimmed(report.trimmed), report
