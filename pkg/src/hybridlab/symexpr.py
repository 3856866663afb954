"""Bitvector expressions over input bytes.

Leaves are input bytes and constants; inner nodes mirror the IR operations.
All values are unsigned modulo 2**width. Builders fold constants so an
expression with no input dependence is always a single ``const`` node.
"""
from __future__ import annotations

from .semantics import mask, to_signed, trunc_div

BOOL_CMPS = ("eq", "ne", "ult", "ule", "slt", "sle")


class Sym:
    __slots__ = ("op", "width", "args", "val")

    def __init__(self, op: str, width: int, args: tuple = (), val: int = 0):
        self.op = op
        self.width = width
        self.args = args
        self.val = val

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self):
        return to_str(self)


def const(value: int, width: int) -> Sym:
    return Sym("const", width, (), value & mask(width))


def byte(offset: int) -> Sym:
    return Sym("byte", 8, (), offset)


TRUE = const(1, 1)
FALSE = const(0, 1)


def _eval_node(op: str, width: int, vals: list[int], args: tuple) -> int:
    m = mask(width)
    if op == "add":
        return (vals[0] + vals[1]) & m
    if op == "sub":
        return (vals[0] - vals[1]) & m
    if op == "mul":
        return (vals[0] * vals[1]) & m
    if op == "udiv":
        return vals[0] // vals[1] if vals[1] else 0
    if op == "urem":
        return vals[0] % vals[1] if vals[1] else 0
    if op in ("sdiv", "srem"):
        a, b = to_signed(vals[0], width), to_signed(vals[1], width)
        if b == 0:
            return 0
        q = trunc_div(a, b)
        return (q if op == "sdiv" else a - q * b) & m
    if op == "shl":
        return (vals[0] << (vals[1] & (width - 1))) & m
    if op == "lshr":
        return vals[0] >> (vals[1] & (width - 1))
    if op == "ashr":
        return (to_signed(vals[0], width) >> (vals[1] & (width - 1))) & m
    if op == "and":
        return vals[0] & vals[1]
    if op == "or":
        return vals[0] | vals[1]
    if op == "xor":
        return vals[0] ^ vals[1]
    if op == "not":
        return vals[0] ^ 1
    if op == "zext":
        return vals[0]
    if op == "sext":
        return to_signed(vals[0], args[0].width) & m
    if op == "trunc":
        return vals[0] & m
    if op == "concat":
        return (vals[0] << args[1].width) | vals[1]
    w = args[0].width
    if op == "eq":
        return int(vals[0] == vals[1])
    if op == "ne":
        return int(vals[0] != vals[1])
    if op == "ult":
        return int(vals[0] < vals[1])
    if op == "ule":
        return int(vals[0] <= vals[1])
    if op == "slt":
        return int(to_signed(vals[0], w) < to_signed(vals[1], w))
    if op == "sle":
        return int(to_signed(vals[0], w) <= to_signed(vals[1], w))
    raise ValueError(op)


def mk(op: str, width: int, *args: Sym) -> Sym:
    """Build a node, folding constants and a few identities."""
    if all(a.op == "const" for a in args):
        return const(_eval_node(op, width, [a.val for a in args], args), width)
    if op in ("add", "sub", "or", "xor", "shl", "lshr", "ashr") and args[1].is_const and args[1].val == 0:
        return args[0]
    if op in ("add", "or", "xor") and args[0].is_const and args[0].val == 0:
        return args[1]
    if op == "and" and args[1].is_const and args[1].val == mask(width):
        return args[0]
    if op == "not" and args[0].op == "not":
        return args[0].args[0]
    if op == "and" and width == 1:
        if args[0].is_const:
            return args[1] if args[0].val else FALSE
        if args[1].is_const:
            return args[0] if args[1].val else FALSE
    if op == "or" and width == 1:
        if args[0].is_const:
            return TRUE if args[0].val else args[1]
        if args[1].is_const:
            return TRUE if args[1].val else args[0]
    return Sym(op, width, tuple(args))


def cmp(pred: str, a: Sym, b: Sym) -> Sym:
    return mk(pred, 1, a, b)


def bool_not(e: Sym) -> Sym:
    if e.is_const:
        return const(e.val ^ 1, 1)
    if e.op == "not":
        return e.args[0]
    return Sym("not", 1, (e,))


def zext(e: Sym, width: int) -> Sym:
    if width == e.width:
        return e
    return mk("zext", width, e)


def sext(e: Sym, width: int) -> Sym:
    if width == e.width:
        return e
    return mk("sext", width, e)


def trunc(e: Sym, width: int) -> Sym:
    if width == e.width:
        return e
    return mk("trunc", width, e)


def concat_bytes(offset: int, nbytes: int) -> Sym:
    """Little-endian multi-byte input read as a concat tree (high part first)."""
    e = byte(offset)
    for k in range(1, nbytes):
        e = Sym("concat", 8 * (k + 1), (byte(offset + k), e))
    return e


# --------------------------------------------------------------------------
# traversal helpers


def walk(roots) -> list[Sym]:
    """Post-order list of distinct nodes reachable from `roots`."""
    seen, out = set(), []
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return out


def support(*roots: Sym) -> frozenset[int]:
    return frozenset(n.val for n in walk(roots) if n.op == "byte")


def evaluate(e: Sym, data) -> int:
    vals: dict[int, int] = {}
    for n in walk([e]):
        if n.op == "const":
            v = n.val
        elif n.op == "byte":
            v = data[n.val] if n.val < len(data) else 0
        else:
            v = _eval_node(n.op, n.width, [vals[id(a)] for a in n.args], n.args)
        vals[id(n)] = v
    return vals[id(e)]


def size(e: Sym) -> int:
    return len(walk([e]))


_INFIX = {"add": "+", "sub": "-", "mul": "*", "and": "&", "or": "|", "xor": "^"}


def compile_exprs(roots: list[Sym]):
    """Generate a Python function ``f(data) -> tuple`` evaluating `roots`.

    Shared subexpressions are computed once. `data` must be indexable by
    every byte offset in the support.
    """
    nodes = walk(roots)
    names: dict[int, str] = {}
    lines = []
    for k, n in enumerate(nodes):
        name = f"t{k}"
        names[id(n)] = name
        a = [names[id(x)] for x in n.args]
        m = mask(n.width)
        op = n.op
        if op == "const":
            expr = str(n.val)
        elif op == "byte":
            expr = f"d[{n.val}]"
        elif op in ("add", "sub", "mul"):
            expr = f"({a[0]} {_INFIX[op]} {a[1]}) & {m}"
        elif op in ("and", "or", "xor"):
            expr = f"{a[0]} {_INFIX[op]} {a[1]}"
        elif op == "not":
            expr = f"{a[0]} ^ 1"
        elif op == "udiv":
            expr = f"({a[0]} // {a[1]} if {a[1]} else 0)"
        elif op == "urem":
            expr = f"({a[0]} % {a[1]} if {a[1]} else 0)"
        elif op == "shl":
            expr = f"({a[0]} << ({a[1]} & {n.width - 1})) & {m}"
        elif op == "lshr":
            expr = f"{a[0]} >> ({a[1]} & {n.width - 1})"
        elif op == "zext":
            expr = a[0]
        elif op == "trunc":
            expr = f"{a[0]} & {m}"
        elif op == "concat":
            expr = f"({a[0]} << {n.args[1].width}) | {a[1]}"
        elif op == "sext":
            w = n.args[0].width
            expr = f"(({a[0]} ^ {1 << (w - 1)}) - {1 << (w - 1)}) & {m}"
        elif op == "eq":
            expr = f"int({a[0]} == {a[1]})"
        elif op == "ne":
            expr = f"int({a[0]} != {a[1]})"
        elif op == "ult":
            expr = f"int({a[0]} < {a[1]})"
        elif op == "ule":
            expr = f"int({a[0]} <= {a[1]})"
        elif op in ("slt", "sle"):
            h = 1 << (n.args[0].width - 1)
            rel = "<" if op == "slt" else "<="
            expr = f"int(({a[0]} ^ {h}) {rel} ({a[1]} ^ {h}))"
        else:
            # sdiv / srem / ashr: rare, go through the reference evaluator
            expr = f"_ev({op!r}, {n.width}, [{', '.join(a)}], _n{k}.args)"
        lines.append(f"    {name} = {expr}")
    ret = ", ".join(names[id(r)] for r in roots)
    src = "def _f(d):\n" + "\n".join(lines) + f"\n    return ({ret},)\n"
    env = {"_ev": _eval_node}
    for k, n in enumerate(nodes):
        if n.op in ("sdiv", "srem", "ashr"):
            env[f"_n{k}"] = n
    exec(compile(src, "<symexpr>", "exec"), env)
    return env["_f"]


def to_str(e: Sym, depth: int = 12) -> str:
    if e.op == "const":
        return hex(e.val) if e.width > 1 else str(e.val)
    if e.op == "byte":
        return f"in[{e.val}]"
    if depth == 0:
        return "..."
    inner = ", ".join(to_str(a, depth - 1) for a in e.args)
    return f"{e.op}{e.width}({inner})"
