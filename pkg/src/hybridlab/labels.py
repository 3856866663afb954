"""Sanitizer-style bug labels: placement and trigger conditions."""
from __future__ import annotations

from dataclasses import dataclass, replace

from . import symexpr as sx
from .ir import ARITH_OPS, SHIFT_OPS, ArrType, Program
from .semantics import arith, index_oob, mask, shift

OOB = "OOB"
SHIFT = "OversizedShift"
SIGNED = "SignedOverflow"
UNSIGNED = "UnsignedOverflow"
FAMILIES = (OOB, SHIFT, SIGNED, UNSIGNED)

LIVE = "live"
TRIMMED = "trimmed"


@dataclass(frozen=True)
class ConditionTemplate:
    """Trigger predicate of one labeled instruction.

    ``operands`` are the instruction operands the predicate reads (registers
    or immediates): ``(x, y)`` for arithmetic and shifts, ``(index,)`` for
    array accesses.
    """

    family: str
    op: str
    width: int
    operands: tuple
    signed: bool = False
    size: int = 0

    def holds(self, *vals: int) -> bool:
        if self.family == OOB:
            return index_oob(vals[0], self.width, self.size)
        if self.family == SHIFT:
            return shift(self.op, self.width, vals[0], vals[1])[1]
        return arith(self.op, self.signed, self.width, vals[0], vals[1])[1]

    def registers(self) -> list[str]:
        regs = [a for a in self.operands if isinstance(a, str)]
        if self.family == SHIFT:
            regs = [a for a in self.operands[1:] if isinstance(a, str)]
        return regs

    def instantiate(self, *args: sx.Sym) -> sx.Sym:
        """Boolean expression that is 1 exactly when ``holds`` is true."""
        n = self.width
        if self.family == OOB:
            bound = min(self.size, 1 << (n - 1))
            return sx.cmp("ult", sx.const(bound - 1, n), args[0])
        if self.family == SHIFT:
            return sx.cmp("ult", sx.const(n - 1, n), args[1])
        a, b = args
        op = self.op
        if not self.signed:
            if op == "add":
                w = n + 1
                total = sx.mk("add", w, sx.zext(a, w), sx.zext(b, w))
                return sx.cmp("ult", sx.const(mask(n), w), total)
            if op == "sub":
                return sx.cmp("ult", a, b)
            if op == "mul":
                w = 2 * n
                prod = sx.mk("mul", w, sx.zext(a, w), sx.zext(b, w))
                return sx.cmp("ult", sx.const(mask(n), w), prod)
            return sx.FALSE
        half = 1 << (n - 1)
        if op in ("add", "sub"):
            # bias both operands into [0, 2^n) and compute in n+2 bits,
            # so the range test needs no signed comparison
            w = n + 2
            ab = sx.zext(sx.mk("add", n, a, sx.const(half, n)), w)
            bb = sx.zext(sx.mk("add", n, b, sx.const(half, n)), w)
            if op == "add":
                s = sx.mk("add", w, ab, bb)
            elif bb.is_const:
                s = sx.mk("add", w, ab, sx.const((1 << n) - bb.val, w))
            else:
                s = sx.mk("sub", w, sx.mk("add", w, ab, sx.const(1 << n, w)), bb)
            low = sx.cmp("ult", s, sx.const((1 << n) - half, w))
            high = sx.cmp("ult", sx.const((1 << n) + half - 1, w), s)
            return sx.mk("or", 1, low, high)
        if op == "mul":
            w = 2 * n
            prod = sx.mk("mul", w, sx.sext(a, w), sx.sext(b, w))
            biased = sx.mk("add", w, prod, sx.const(half, w))
            return sx.cmp("ult", sx.const(mask(n), w), biased)
        if op == "div":
            return sx.mk("and", 1, sx.cmp("eq", a, sx.const(half, n)), sx.cmp("eq", b, sx.const(mask(n), n)))
        return sx.FALSE


@dataclass(frozen=True)
class BugLabel:
    id: int
    family: str
    function: str
    block: str
    index: int
    condition: ConditionTemplate
    status: str = LIVE

    @property
    def site(self) -> tuple[str, str, int]:
        return (self.function, self.block, self.index)

    @property
    def live(self) -> bool:
        return self.status == LIVE


class LabelSet:
    """Immutable collection of labels keyed by id and by instruction site."""

    def __init__(self, labels=()):
        self.labels = tuple(sorted(labels, key=lambda l: l.id))
        self.by_id = {l.id: l for l in self.labels}
        self.by_site = {l.site: l for l in self.labels}

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, label_id: int) -> BugLabel:
        return self.by_id[label_id]

    def live(self) -> list[BugLabel]:
        return [l for l in self.labels if l.live]

    def live_ids(self) -> frozenset[int]:
        return frozenset(l.id for l in self.labels if l.live)

    def with_trimmed(self, ids) -> "LabelSet":
        ids = set(ids)
        return LabelSet(replace(l, status=TRIMMED) if l.id in ids else l for l in self.labels)

    def all_live(self) -> "LabelSet":
        return LabelSet(replace(l, status=LIVE) for l in self.labels)

    def live_in_block(self, function: str, block: str) -> list[BugLabel]:
        return [l for l in self.labels if l.live and l.function == function and l.block == block]


def place_labels(p: Program) -> LabelSet:
    """Label every eligible instruction; ids follow program order from 1."""
    out = []
    next_id = 1
    for f in p.functions:
        for b in f.blocks:
            for k, ins in enumerate(b.instrs):
                tmpl = None
                if ins.op in ARITH_OPS:
                    fam = SIGNED if ins.signed else UNSIGNED
                    tmpl = ConditionTemplate(fam, ins.op, ins.width, ins.args, ins.signed)
                elif ins.op in SHIFT_OPS:
                    tmpl = ConditionTemplate(SHIFT, ins.op, ins.width, ins.args)
                elif ins.op in ("arr.load", "arr.store"):
                    at = f.reg_types[ins.args[0]]
                    assert isinstance(at, ArrType)
                    idx = ins.args[1]
                    iw = f.reg_types[idx] if isinstance(idx, str) else 32
                    tmpl = ConditionTemplate(OOB, ins.op, iw, (idx,), size=at.size)
                if tmpl is not None:
                    out.append(BugLabel(next_id, tmpl.family, f.name, b.label, k, tmpl))
                    next_id += 1
    return LabelSet(out)


def format_labels(ls: LabelSet, evidence: dict | None = None) -> str:
    """``id family fn:block:idx status [trim-evidence]`` per line."""
    lines = []
    for l in ls:
        line = f"{l.id} {l.family} {l.function}:{l.block}:{l.index} {l.status}"
        if evidence and l.id in evidence:
            line += " " + evidence[l.id]
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")
