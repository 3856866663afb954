"""Layered solver for conjunctions of boolean bitvector expressions.

Layers, cheapest first:

* the starting assignment (usually the seed) may already satisfy everything;
* interval and known-bits narrowing over byte domains, which can refute the
  query outright and pins bytes that have only one possible value;
* exact inversion of ``expr == const`` when ``expr`` is a chain of
  invertible operations over input bytes (magic-number guards);
* exhaustive enumeration when at most ``exhaustive_cap`` bytes remain free;
* randomized local search guided by comparison distances.

Every SAT answer is re-checked by concrete evaluation before it is returned.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from . import symexpr as sx
from .semantics import mask, to_signed

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SolveResult:
    status: str
    witness: bytes | None = None
    support: frozenset[int] = frozenset()
    work: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT


class _Unsat(Exception):
    pass


# --------------------------------------------------------------------------
# interval narrowing


def _bias(iv, w):
    """Map an unsigned interval to the order used by signed comparison."""
    h = 1 << (w - 1)
    lo, hi = iv
    if hi < h:
        return lo + h, hi + h
    if lo >= h:
        return lo - h, hi - h
    return None


class _Narrowing:
    def __init__(self, cons: list[sx.Sym], domains: dict[int, tuple[int, int]]):
        self.cons = cons
        self.dom = domains
        self.fw: dict[int, tuple[int, int]] = {}
        self.steps = 0

    def forward(self, n: sx.Sym) -> tuple[int, int]:
        got = self.fw.get(id(n))
        if got is not None:
            return got
        self.steps += 1
        iv = self._forward(n)
        if iv[0] > iv[1]:
            raise _Unsat
        self.fw[id(n)] = iv
        return iv

    def _forward(self, n: sx.Sym) -> tuple[int, int]:
        op, w = n.op, n.width
        m = mask(w)
        if op == "const":
            return n.val, n.val
        if op == "byte":
            return self.dom[n.val]
        a = [self.forward(x) for x in n.args]
        if all(lo == hi for lo, hi in a):
            v = sx._eval_node(op, w, [lo for lo, _ in a], n.args)
            return v, v
        top = (0, m)
        if op == "concat":
            wl = n.args[1].width
            return (a[0][0] << wl) | a[1][0], (a[0][1] << wl) | a[1][1]
        if op == "zext":
            return a[0]
        if op == "trunc":
            return a[0] if a[0][1] <= m else top
        if op == "sext":
            sw = n.args[0].width
            if a[0][1] < 1 << (sw - 1):
                return a[0]
            if a[0][0] >= 1 << (sw - 1):
                off = (1 << w) - (1 << sw)
                return a[0][0] + off, a[0][1] + off
            return top
        if op == "add":
            lo, hi = a[0][0] + a[1][0], a[0][1] + a[1][1]
            if hi <= m:
                return lo, hi
            if lo > m:
                return lo - (1 << w), hi - (1 << w)
            return top
        if op == "sub":
            lo, hi = a[0][0] - a[1][1], a[0][1] - a[1][0]
            if lo >= 0:
                return lo, hi
            if hi < 0:
                return lo + (1 << w), hi + (1 << w)
            return top
        if op == "mul":
            hi = a[0][1] * a[1][1]
            return (a[0][0] * a[1][0], hi) if hi <= m else top
        if op == "and":
            return 0, min(a[0][1], a[1][1])
        if op in ("or", "xor"):
            cap = (1 << max(a[0][1], a[1][1]).bit_length()) - 1
            return (max(a[0][0], a[1][0]) if op == "or" else 0), min(cap, m)
        if op == "udiv":
            if a[1][0] > 0:
                return a[0][0] // a[1][1], a[0][1] // a[1][0]
            return 0, a[0][1]
        if op == "urem":
            return 0, (min(a[0][1], a[1][1] - 1) if a[1][0] > 0 else a[0][1])
        if op == "lshr" and a[1][0] == a[1][1]:
            k = a[1][0] & (w - 1)
            return a[0][0] >> k, a[0][1] >> k
        if op == "shl" and a[1][0] == a[1][1]:
            k = a[1][0] & (w - 1)
            return (a[0][0] << k, a[0][1] << k) if a[0][1] << k <= m else top
        if op == "not":
            return 1 - a[0][1], 1 - a[0][0]
        if w == 1 and op in ("eq", "ne", "ult", "ule", "slt", "sle"):
            return self._cmp_forward(op, a, n.args[0].width)
        return top

    @staticmethod
    def _cmp_forward(op, a, w):
        if op in ("slt", "sle"):
            x, y = _bias(a[0], w), _bias(a[1], w)
            if x is None or y is None:
                return 0, 1
            a, op = [x, y], "ult" if op == "slt" else "ule"
        (al, ah), (bl, bh) = a
        if op in ("eq", "ne"):
            disjoint = ah < bl or bh < al
            if disjoint:
                r = 0
            elif al == ah == bl == bh:
                r = 1
            else:
                return 0, 1
            r = r if op == "eq" else 1 - r
            return r, r
        if op == "ult":
            if ah < bl:
                return 1, 1
            if al >= bh:
                return 0, 0
            return 0, 1
        if ah <= bl:
            return 1, 1
        if al > bh:
            return 0, 0
        return 0, 1

    # backward --------------------------------------------------------------

    def narrow(self, n: sx.Sym, lo: int, hi: int) -> bool:
        """Require n ∈ [lo, hi]; returns True when some byte domain shrank."""
        flo, fhi = self.forward(n)
        lo, hi = max(lo, flo), min(hi, fhi)
        if lo > hi:
            raise _Unsat
        if (lo, hi) == (flo, fhi):
            return False
        self.steps += 1
        op, w = n.op, n.width
        m = mask(w)
        args = n.args
        if op == "byte":
            if (lo, hi) != self.dom[n.val]:
                self.dom[n.val] = (lo, hi)
                return True
            return False
        if op == "const":
            return False
        changed = False
        if op == "concat":
            wl = args[1].width
            changed |= self.narrow(args[0], lo >> wl, hi >> wl)
            if lo >> wl == hi >> wl:
                changed |= self.narrow(args[1], lo & mask(wl), hi & mask(wl))
            return changed
        if op == "zext":
            return self.narrow(args[0], lo, min(hi, mask(args[0].width)))
        if op == "trunc":
            if self.forward(args[0])[1] <= m:
                return self.narrow(args[0], lo, hi)
            return False
        if op in ("add", "sub") and (args[0].is_const or args[1].is_const):
            if op == "add":
                x, c = (args[0], args[1].val) if args[1].is_const else (args[1], args[0].val)
                nlo, nhi = lo - c, hi - c
            elif args[1].is_const:
                x, c = args[0], args[1].val
                nlo, nhi = lo + c, hi + c
            else:
                x, c = args[1], args[0].val
                nlo, nhi = c - hi, c - lo
            if nlo >= 0 and nhi <= m:
                return self.narrow(x, nlo, nhi)
            if nhi < 0:
                return self.narrow(x, nlo + (1 << w), nhi + (1 << w))
            if nlo > m:
                return self.narrow(x, nlo - (1 << w), nhi - (1 << w))
            return False
        if lo == hi and op == "xor" and (args[0].is_const or args[1].is_const):
            x, c = (args[0], args[1].val) if args[1].is_const else (args[1], args[0].val)
            v = lo ^ c
            return self.narrow(x, v, v)
        if lo == hi and op == "mul" and (args[0].is_const or args[1].is_const):
            x, c = (args[0], args[1].val) if args[1].is_const else (args[1], args[0].val)
            if c & 1:
                v = (lo * pow(c, -1, 1 << w)) & m
                return self.narrow(x, v, v)
            return False
        if w != 1 or lo != hi:
            return False
        want = lo
        if op == "not":
            return self.narrow(args[0], 1 - want, 1 - want)
        if op == "and" and want == 1:
            return self.narrow(args[0], 1, 1) | self.narrow(args[1], 1, 1)
        if op == "or" and want == 0:
            return self.narrow(args[0], 0, 0) | self.narrow(args[1], 0, 0)
        if op == "or":
            # one disjunct already refuted: the other must hold
            if self.forward(args[0]) == (0, 0):
                return self.narrow(args[1], 1, 1)
            if self.forward(args[1]) == (0, 0):
                return self.narrow(args[0], 1, 1)
            return False
        if op in ("eq", "ne"):
            if (op == "eq") == bool(want):
                a, b = self.forward(args[0]), self.forward(args[1])
                return self.narrow(args[0], *b) | self.narrow(args[1], *a)
            return False
        if op in ("ult", "ule", "slt", "sle"):
            x, y = args
            strict = op in ("ult", "slt")
            if not want:
                x, y, strict = y, x, not strict
            # require x < y (strict) or x <= y
            d = 1 if strict else 0
            if op in ("slt", "sle"):
                xa, ya = _bias(self.forward(x), x.width), _bias(self.forward(y), y.width)
                if xa is None or ya is None:
                    return False
                h = 1 << (x.width - 1)
                hi_x, lo_y = min(xa[1], ya[1] - d), max(ya[0], xa[0] + d)
                if hi_x < xa[0] or lo_y > ya[1]:
                    raise _Unsat
                # each operand sits in one half, where un-biasing is monotone
                return self.narrow(x, xa[0] ^ h, hi_x ^ h) | self.narrow(y, lo_y ^ h, ya[1] ^ h)
            xa, ya = self.forward(x), self.forward(y)
            return self.narrow(x, xa[0], ya[1] - d) | self.narrow(y, xa[0] + d, ya[1])
        return False

    def run(self, rounds: int = 40) -> None:
        for _ in range(rounds):
            self.fw = {}
            changed = False
            for c in self.cons:
                changed |= self.narrow(c, 1, 1)
            if not changed:
                break
        self.fw = {}
        for c in self.cons:
            if self.forward(c) == (0, 0):
                raise _Unsat


# --------------------------------------------------------------------------
# known bits (forward only; refutes e.g. (x | 1) == 2)


def _known(n: sx.Sym, dom, memo) -> tuple[int, int]:
    """(mask of known bits, their values)."""
    got = memo.get(id(n))
    if got is not None:
        return got
    m = mask(n.width)
    op = n.op
    if op == "const":
        r = (m, n.val)
    elif op == "byte":
        lo, hi = dom[n.val]
        if lo == hi:
            r = (0xFF, lo)
        else:
            # common high prefix of lo and hi
            diff = (lo ^ hi).bit_length()
            km = 0xFF & ~((1 << diff) - 1)
            r = (km, lo & km)
    else:
        ks = [_known(a, dom, memo) for a in n.args]
        if op == "concat":
            wl = n.args[1].width
            r = ((ks[0][0] << wl) | ks[1][0], (ks[0][1] << wl) | ks[1][1])
        elif op == "zext":
            r = (ks[0][0] | (m & ~mask(n.args[0].width)), ks[0][1])
        elif op == "trunc":
            r = (ks[0][0] & m, ks[0][1] & m)
        elif op == "and":
            zeros = (ks[0][0] & ~ks[0][1]) | (ks[1][0] & ~ks[1][1])
            ones = ks[0][0] & ks[0][1] & ks[1][0] & ks[1][1]
            r = ((zeros | ones) & m, ones)
        elif op == "or":
            ones = (ks[0][0] & ks[0][1]) | (ks[1][0] & ks[1][1])
            zeros = ks[0][0] & ~ks[0][1] & ks[1][0] & ~ks[1][1]
            r = ((zeros | ones) & m, ones & m)
        elif op == "xor":
            km = ks[0][0] & ks[1][0]
            r = (km, (ks[0][1] ^ ks[1][1]) & km)
        elif op == "shl" and n.args[1].is_const:
            k = n.args[1].val & (n.width - 1)
            r = (((ks[0][0] << k) | ((1 << k) - 1)) & m, (ks[0][1] << k) & m)
        elif op == "lshr" and n.args[1].is_const:
            k = n.args[1].val & (n.width - 1)
            r = ((ks[0][0] >> k) | (m & ~(m >> k)), ks[0][1] >> k)
        elif op == "eq":
            km = ks[0][0] & ks[1][0]
            r = (1, 0) if (ks[0][1] ^ ks[1][1]) & km else (0, 0)
        elif op == "ne":
            km = ks[0][0] & ks[1][0]
            r = (1, 1) if (ks[0][1] ^ ks[1][1]) & km else (0, 0)
        elif op == "not":
            r = (ks[0][0], (ks[0][1] ^ 1) & ks[0][0])
        else:
            r = (0, 0)
    memo[id(n)] = r
    return r


# --------------------------------------------------------------------------
# affine inversion


def _invert(n: sx.Sym, target: int, assign: dict[int, int], cur) -> bool:
    """Choose byte values so that n evaluates to `target`; False if stuck."""
    op, w = n.op, n.width
    m = mask(w)
    if target > m or target < 0:
        return False
    if op == "byte":
        if assign.get(n.val, target) != target:
            return False
        assign[n.val] = target
        return True
    if op == "const":
        return n.val == target
    a = n.args
    if op == "concat":
        wl = a[1].width
        return _invert(a[0], target >> wl, assign, cur) and _invert(a[1], target & mask(wl), assign, cur)
    if op == "zext":
        return _invert(a[0], target, assign, cur)
    if op == "sext":
        sw = a[0].width
        v = target & mask(sw)
        return to_signed(v, sw) & m == target and _invert(a[0], v, assign, cur)
    if op == "trunc":
        high = sx.evaluate(a[0], cur) & ~m
        return _invert(a[0], high | target, assign, cur)
    if op in ("add", "sub", "xor", "mul"):
        if a[1].is_const:
            x, c, left = a[0], a[1].val, False
        elif a[0].is_const:
            x, c, left = a[1], a[0].val, True
        else:
            return False
        if op == "add":
            v = target - c
        elif op == "sub":
            v = c - target if left else target + c
        elif op == "xor":
            v = target ^ c
        else:
            if not c & 1:
                return False
            v = target * pow(c, -1, 1 << w)
        return _invert(x, v & m, assign, cur)
    if op == "not":
        return _invert(a[0], target ^ 1, assign, cur)
    return False


def _eq_targets(c: sx.Sym):
    """(expr, value) pairs implied by a constraint, for inversion."""
    if c.op == "eq":
        if c.args[1].is_const:
            return [(c.args[0], c.args[1].val)]
        if c.args[0].is_const:
            return [(c.args[1], c.args[0].val)]
    if c.op == "not" and c.args[0].op == "ne":
        return _eq_targets(sx.cmp("eq", *c.args[0].args))
    if c.op == "and":
        return _eq_targets(c.args[0]) + _eq_targets(c.args[1])
    return []


# --------------------------------------------------------------------------
# search helpers


def _distance(c: sx.Sym, vals: dict[int, int]) -> int:
    """Heuristic distance from satisfying one constraint (0 = satisfied)."""
    v = vals[id(c)]
    if v:
        return 0
    op = c.op
    if op in ("eq", "ult", "ule", "slt", "sle") and len(c.args) == 2:
        x, y = vals[id(c.args[0])], vals[id(c.args[1])]
        if op in ("slt", "sle"):
            w = c.args[0].width
            x, y = to_signed(x, w), to_signed(y, w)
        return abs(x - y).bit_length() + 1
    if op == "and":
        return _distance(c.args[0], vals) + _distance(c.args[1], vals)
    if op == "or":
        return min(_distance(c.args[0], vals), _distance(c.args[1], vals))
    if op == "not" and c.args[0].op == "eq":
        return 1
    return 1


def _all_values(nodes, data) -> dict[int, int]:
    vals = {}
    for n in nodes:
        if n.op == "const":
            v = n.val
        elif n.op == "byte":
            v = data[n.val]
        else:
            v = sx._eval_node(n.op, n.width, [vals[id(a)] for a in n.args], n.args)
        vals[id(n)] = v
    return vals


def _const_bytes(nodes) -> list[int]:
    out = set()
    for n in nodes:
        if n.op == "const" and n.width >= 8:
            v = n.val
            for k in range(n.width // 8):
                out.add((v >> (8 * k)) & 0xFF)
                out.add(((v >> (8 * k)) + 1) & 0xFF)
                out.add(((v >> (8 * k)) - 1) & 0xFF)
    return sorted(out)


# --------------------------------------------------------------------------


def solve(constraints: list[sx.Sym], input_len: int, start: bytes | None = None, *,
          exhaustive_cap: int = 2, search_budget: int = 2000, rng: random.Random | None = None) -> SolveResult:
    """Find input bytes satisfying every constraint (each a width-1 expr).

    Bytes outside the constraints' support keep their value from `start`
    (all zeros when omitted), so a witness differs from the start only on
    the support.
    """
    cons = []
    for c in constraints:
        if c.is_const:
            if c.val == 0:
                return SolveResult(UNSAT)
            continue
        cons.append(c)
    base = bytearray(start if start is not None else bytes(input_len))
    base.extend(bytes(max(0, input_len - len(base))))
    supp = sx.support(*cons)
    if not cons:
        return SolveResult(SAT, bytes(base), supp, 1)
    check = sx.compile_exprs(cons)
    work = 1

    def ok(d) -> bool:
        return all(check(d))

    if ok(base):
        return SolveResult(SAT, bytes(base), supp, work)

    # narrowing
    dom = {o: (0, 255) for o in supp}
    nar = _Narrowing(cons, dom)
    try:
        nar.run()
        memo: dict[int, tuple[int, int]] = {}
        for c in cons:
            km, kv = _known(c, dom, memo)
            if km & 1 and not kv & 1:
                raise _Unsat
    except _Unsat:
        return SolveResult(UNSAT, None, supp, work + nar.steps)
    work += nar.steps
    cur = bytearray(base)
    for o, (lo, hi) in dom.items():
        if not lo <= cur[o] <= hi:
            cur[o] = lo
    if ok(cur):
        return SolveResult(SAT, bytes(cur), supp, work)

    # affine inversion of equalities
    assign: dict[int, int] = {}
    for c in cons:
        for e, v in _eq_targets(c):
            trial = dict(assign)
            if _invert(e, v, trial, cur):
                assign = trial
            work += 1
    if assign:
        for o, v in assign.items():
            cur[o] = v
        work += 1
        if ok(cur):
            return SolveResult(SAT, bytes(cur), supp, work)

    # exhaustive over the free bytes
    free = sorted(o for o in supp if dom[o][0] != dom[o][1])
    for o in supp:
        if dom[o][0] == dom[o][1]:
            cur[o] = dom[o][0]
    if len(free) <= exhaustive_cap:
        trial = bytearray(cur)
        for combo in itertools.product(*(range(dom[o][0], dom[o][1] + 1) for o in free)):
            for o, v in zip(free, combo):
                trial[o] = v
            work += 1
            if ok(trial):
                return SolveResult(SAT, bytes(trial), supp, work)
        return SolveResult(UNSAT, None, supp, work)

    # local search
    rng = rng or random.Random(len(cons) * 7919 + len(supp))
    nodes = sx.walk(cons)
    pool = _const_bytes(nodes)

    def cost(d) -> int:
        vals = _all_values(nodes, d)
        return sum(_distance(c, vals) for c in cons)

    best = bytearray(cur)
    best_cost = cost(best)
    for _ in range(search_budget):
        work += 1
        trial = bytearray(best)
        for _ in range(rng.choice((1, 1, 2, 3))):
            o = rng.choice(free)
            lo, hi = dom[o]
            r = rng.random()
            if r < 0.4 and pool:
                v = rng.choice(pool)
            elif r < 0.7:
                v = trial[o] + rng.choice((-1, 1, -2, 2, -16, 16))
            else:
                v = rng.randint(lo, hi)
            trial[o] = min(max(v, lo), hi)
        c = cost(trial)
        if c == 0 and ok(trial):
            return SolveResult(SAT, bytes(trial), supp, work)
        if c <= best_cost:
            best, best_cost = trial, c
    return SolveResult(UNKNOWN, None, supp, work)
