"""Fixed-width integer semantics shared by every interpreter.

Values are stored unsigned (``0 <= v < 2**width``). Helpers return the
wrapped result together with a flag telling whether the operation left the
representable range, which is what the sanitizer-style labels check.
"""
from __future__ import annotations


def mask(width: int) -> int:
    return (1 << width) - 1


def to_signed(v: int, width: int) -> int:
    return v - (1 << width) if v >> (width - 1) else v


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def arith(op: str, signed: bool, width: int, a: int, b: int) -> tuple[int, bool]:
    """Evaluate add/sub/mul/div/rem. Returns (wrapped result, overflowed).

    Division or remainder by zero yields 0 and never counts as overflow.
    Remainder never overflows (the mathematical result always fits).
    """
    if signed:
        x, y = to_signed(a, width), to_signed(b, width)
        lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    else:
        x, y = a, b
        lo, hi = 0, mask(width)
    if op == "add":
        r = x + y
    elif op == "sub":
        r = x - y
    elif op == "mul":
        r = x * y
    elif op == "div":
        if y == 0:
            return 0, False
        r = trunc_div(x, y)
    elif op == "rem":
        if y == 0:
            return 0, False
        r = x - trunc_div(x, y) * y
    else:
        raise ValueError(op)
    return r & mask(width), not lo <= r <= hi


def shift(op: str, width: int, a: int, b: int) -> tuple[int, bool]:
    """Evaluate shl/lshr/ashr; an oversized amount is masked to width-1."""
    amount = to_signed(b, width)
    oversized = amount < 0 or amount >= width
    k = b & (width - 1)
    if op == "shl":
        r = (a << k) & mask(width)
    elif op == "lshr":
        r = a >> k
    elif op == "ashr":
        r = (to_signed(a, width) >> k) & mask(width)
    else:
        raise ValueError(op)
    return r, oversized


def bitwise(op: str, a: int, b: int) -> int:
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    raise ValueError(op)


def cast(op: str, src_width: int, width: int, a: int) -> int:
    if op == "zext":
        return a
    if op == "sext":
        return to_signed(a, src_width) & mask(width)
    if op == "trunc":
        return a & mask(width)
    raise ValueError(op)


def compare(pred: str, width: int, a: int, b: int) -> int:
    if pred == "eq":
        return int(a == b)
    if pred == "ne":
        return int(a != b)
    if pred == "ult":
        return int(a < b)
    if pred == "ule":
        return int(a <= b)
    sa, sb = to_signed(a, width), to_signed(b, width)
    if pred == "slt":
        return int(sa < sb)
    if pred == "sle":
        return int(sa <= sb)
    raise ValueError(pred)


def index_oob(idx: int, idx_width: int, size: int) -> bool:
    """Array indices are signed values of their register width."""
    s = to_signed(idx, idx_width)
    return s < 0 or s >= size


def read_input(data: bytes, offset: int, width: int) -> int:
    """Little-endian read of width/8 bytes."""
    return int.from_bytes(data[offset:offset + width // 8], "little")
