"""Run a single-function program on *every* input at once.

Each possible input vector is one numpy lane, so a 3-byte program is
16.7M lanes processed in chunks. This is an independent implementation of
the IR semantics used as an oracle (trim soundness, infeasible plants);
it supports what small test programs need: no calls, no 64-bit labeled
arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ir import Br, Jmp, Program
from .labels import OOB, SHIFT, LabelSet

U64 = np.uint64


@dataclass
class ExhaustiveResult:
    violations: dict[int, bytes] = field(default_factory=dict)
    reached: set[int] = field(default_factory=set)
    unfinished: int = 0
    inputs: int = 0


def _signed(a: np.ndarray, w: int) -> np.ndarray:
    h = 1 << (w - 1)
    return ((a ^ U64(h)).astype(np.int64) - h) if w < 64 else a.view(np.int64)


def exhaustive_violations(p: Program, labels: LabelSet, chunk: int = 1 << 20, max_steps: int = 4096,
                          max_input_len: int = 3) -> ExhaustiveResult:
    """Enumerate every input; first violating input per label.

    ``inputs`` in the result counts the distinct lanes actually run, i.e.
    256 to the number of input bytes the program reads.
    """
    f = p.function(p.entry)
    if len(p.functions) != 1 or f.params:
        raise NotImplementedError("exhaustive enumeration supports single-function programs")
    L = p.input_len
    if L > max_input_len:
        raise ValueError(f"input length {L} too large to enumerate")
    live = {l.site: l for l in labels.live()}
    for b in f.blocks:
        for k, ins in enumerate(b.instrs):
            if ins.op in ("call", "icall"):
                raise NotImplementedError("calls are not supported")
            lab = live.get((f.name, b.label, k))
            if lab is not None and lab.family not in (OOB, SHIFT) and ins.width > 32:
                raise NotImplementedError("64-bit labeled arithmetic is not supported")
    bid = {b.label: k for k, b in enumerate(f.blocks)}
    # bytes never read cannot influence a run, so enumerate only the read ones
    used = sorted({ins.args[0] + k for b in f.blocks for ins in b.instrs if ins.op == "in"
                   for k in range(ins.width // 8) if ins.args[0] + k < L})
    res = ExhaustiveResult(inputs=256 ** len(used))
    cells = sum(ins.args[0] for b in f.blocks for ins in b.instrs if ins.op == "arr.alloc")
    chunk = max(1 << 12, min(chunk, (1 << 24) // (1 + cells)))
    for start in range(0, res.inputs, chunk):
        k = np.arange(start, min(res.inputs, start + chunk), dtype=np.int64)
        lanes = np.zeros_like(k)
        for j, off in enumerate(used):
            lanes |= ((k >> (8 * j)) & 0xFF) << (8 * off)
        _run_chunk(f, L, lanes, bid, live, res, max_steps)
    return res


def _run_chunk(f, L, lanes, bid, live, res: ExhaustiveResult, max_steps):
    C = lanes.size
    in_bytes = [((lanes >> (8 * k)) & 0xFF).astype(np.uint64) for k in range(L)]
    regs: dict[str, np.ndarray] = {}
    cur = np.full(C, bid[f.entry_block], dtype=np.int64)
    types = f.reg_types

    for _ in range(max_steps):
        live_lanes = cur >= 0
        if not live_lanes.any():
            break
        present = np.unique(cur[live_lanes])
        for b_index in present:
            b = f.blocks[b_index]
            idx = np.flatnonzero(cur == b_index)
            if idx.size == 0:
                continue

            def val(a):
                if isinstance(a, int):
                    return np.full(idx.size, a, dtype=np.uint64)
                r = regs.get(a)
                if r is None:
                    r = regs[a] = np.zeros(C, dtype=np.uint64)
                return r[idx]

            def put(name, v):
                r = regs.get(name)
                if r is None:
                    r = regs[name] = np.zeros(C, dtype=np.uint64)
                r[idx] = v

            for k, ins in enumerate(b.instrs):
                lab = live.get((f.name, b.label, k))
                if lab is not None:
                    res.reached.add(lab.id)
                bad = _exec(ins, idx, val, put, regs, types, in_bytes, L, C)
                if lab is not None and bad is not None and lab.id not in res.violations and bad.any():
                    lane = int(lanes[idx[np.flatnonzero(bad)[0]]])
                    res.violations[lab.id] = lane.to_bytes(L, "little")
            t = b.term
            if isinstance(t, Jmp):
                cur[idx] = bid[t.target]
            elif isinstance(t, Br):
                c = val(t.cond).astype(bool)
                cur[idx] = np.where(c, bid[t.then], bid[t.other])
            else:
                cur[idx] = -1
    res.unfinished += int((cur >= 0).sum())


def _exec(ins, idx, val, put, regs, types, in_bytes, L, C):
    """Execute one instruction on lanes `idx`; return violation mask or None."""
    op, w = ins.op, ins.width
    if op == "const":
        put(ins.dest, U64(ins.args[0]))
        return None
    if op == "in":
        o = ins.args[0]
        v = np.zeros(idx.size, dtype=np.uint64)
        for k in range(w // 8):
            if o + k < L:
                v |= in_bytes[o + k][idx] << U64(8 * k)
        put(ins.dest, v)
        return None
    if op == "arr.alloc":
        arr = regs.get(ins.dest)
        if arr is None:
            regs[ins.dest] = np.zeros((C, ins.args[0]), dtype=np.uint64)
        else:
            arr[idx] = 0
        return None
    if op in ("arr.load", "arr.store"):
        arr = regs.get(ins.args[0])
        size = arr.shape[1]
        i_arg = ins.args[1]
        iw = 32 if isinstance(i_arg, int) else types[i_arg]
        i = _signed(val(i_arg), iw)
        inb = (i >= 0) & (i < size)
        safe = np.where(inb, i, 0)
        if op == "arr.load":
            put(ins.dest, np.where(inb, arr[idx, safe], U64(0)))
        else:
            v = val(ins.args[2])
            arr[idx[inb], safe[inb]] = v[inb]
        return ~inb
    a = [val(x) for x in ins.args]
    if op in ("add", "sub", "mul", "div", "rem"):
        m = U64((1 << w) - 1)
        x, y = a
        if op in ("add", "sub", "mul"):
            fn = {"add": np.add, "sub": np.subtract, "mul": np.multiply}[op]
            put(ins.dest, fn(x, y) & m)
            if w > 32:
                return None
            if ins.signed:
                sx, sy = _signed(x, w), _signed(y, w)
                r = fn(sx, sy)
                return (r < -(1 << (w - 1))) | (r > (1 << (w - 1)) - 1)
            if op == "add":
                return (x + y) > m
            if op == "sub":
                return x < y
            return (x * y) > m
        zero = y == 0
        if not ins.signed:
            ys = np.where(zero, U64(1), y)
            r = x // ys if op == "div" else x % ys
            put(ins.dest, np.where(zero, U64(0), r))
            return np.zeros(idx.size, dtype=bool)
        sx, sy = _signed(x, w), _signed(y, w)
        sys_ = np.where(zero, 1, sy)
        q = np.abs(sx) // np.abs(sys_)
        q = np.where((sx < 0) != (sys_ < 0), -q, q)
        r = q if op == "div" else sx - q * sys_
        r = np.where(zero, 0, r)
        put(ins.dest, r.astype(np.uint64) & m)
        if op == "div":
            return (~zero) & ((r < -(1 << (w - 1))) | (r > (1 << (w - 1)) - 1))
        return np.zeros(idx.size, dtype=bool)
    if op in ("shl", "lshr", "ashr"):
        m = U64((1 << w) - 1)
        x, y = a
        k = y & U64(w - 1)
        if op == "shl":
            put(ins.dest, (x << k) & m)
        elif op == "lshr":
            put(ins.dest, x >> k)
        else:
            put(ins.dest, (_signed(x, w) >> k.astype(np.int64)).astype(np.uint64) & m)
        s = _signed(y, w)
        return (s < 0) | (s >= w)
    if op in ("and", "or", "xor"):
        fn = {"and": np.bitwise_and, "or": np.bitwise_or, "xor": np.bitwise_xor}[op]
        put(ins.dest, fn(a[0], a[1]))
        return None
    if op == "zext":
        put(ins.dest, a[0])
        return None
    if op == "sext":
        sw = types[ins.args[0]]
        h = U64(1 << (sw - 1))
        put(ins.dest, ((a[0] ^ h) - h) & U64((1 << w) - 1))
        return None
    if op == "trunc":
        put(ins.dest, a[0] & U64((1 << w) - 1))
        return None
    if op == "cmp":
        x, y = a
        cw = next(types[r] for r in ins.args if isinstance(r, str))
        pred = ins.pred
        if pred in ("slt", "sle"):
            h = U64(1 << (cw - 1))
            x, y = x ^ h, y ^ h
        r = {"eq": np.equal, "ne": np.not_equal, "ult": np.less, "ule": np.less_equal,
             "slt": np.less, "sle": np.less_equal}[pred](x, y)
        put(ins.dest, r.astype(np.uint64))
        return None
    raise NotImplementedError(op)
