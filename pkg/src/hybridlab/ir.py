"""Miniature IR: data model, text parser and static validation.

Text format (tokens may be split across lines freely; ``;`` starts a comment)::

    input 8                 ; input vector length in bytes (default 64)
    table f, g              ; functions reachable through icall
    entry main              ; optional, defaults to ``main``

    func f(v0:u32, entry=b0) -> u32 {
    b0:
      v1 = add.u32 v0, 1
      ret v1
    }

Registers are mutable and typed: every definition of a register inside one
function must produce the same type.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

WIDTHS = (8, 16, 32, 64)
BOOL = 1

ARITH_OPS = ("add", "sub", "mul", "div", "rem")
SHIFT_OPS = ("shl", "lshr", "ashr")
BITWISE_OPS = ("and", "or", "xor")
CAST_OPS = ("zext", "sext", "trunc")
CMP_PREDS = ("eq", "ne", "slt", "sle", "ult", "ule")


class IRError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + msg)


class IRSyntaxError(IRError):
    pass


class ValidationError(IRError):
    pass


@dataclass(frozen=True)
class ArrType:
    elem: int
    size: int


@dataclass(frozen=True)
class Instr:
    """One non-terminator instruction.

    ``args`` holds operands: ``str`` for registers, ``int`` for immediates.
    ``width`` is the operating width (result width for casts, element width
    for ``arr.alloc``); ``signed`` is only meaningful for div/rem and for the
    label family of add/sub/mul/div/rem.
    """

    op: str
    dest: str | None = None
    args: tuple = ()
    width: int | None = None
    signed: bool = False
    pred: str | None = None
    callee: str | None = None
    line: int = 0

    def regs_used(self):
        return [a for a in self.args if isinstance(a, str)]

    def __str__(self):
        return format_instr(self)


@dataclass(frozen=True)
class Jmp:
    target: str
    line: int = 0


@dataclass(frozen=True)
class Br:
    cond: str
    then: str
    other: str
    line: int = 0


@dataclass(frozen=True)
class Ret:
    value: str | int | None = None
    line: int = 0


Terminator = Jmp | Br | Ret


@dataclass(eq=False)
class BasicBlock:
    label: str
    instrs: list[Instr]
    term: Terminator

    def successors(self) -> list[str]:
        if isinstance(self.term, Jmp):
            return [self.term.target]
        if isinstance(self.term, Br):
            if self.term.then == self.term.other:
                return [self.term.then]
            return [self.term.then, self.term.other]
        return []


@dataclass(eq=False)
class Function:
    name: str
    params: list[tuple[str, int]]
    blocks: list[BasicBlock]
    entry_block: str
    ret_width: int | None = None
    reg_types: dict = field(default_factory=dict)
    line: int = 0

    def __post_init__(self):
        self.block_map = {b.label: b for b in self.blocks}

    def block(self, label: str) -> BasicBlock:
        return self.block_map[label]

    def successors(self) -> dict[str, list[str]]:
        return {b.label: b.successors() for b in self.blocks}

    def predecessors(self) -> dict[str, list[str]]:
        preds: dict[str, list[str]] = {b.label: [] for b in self.blocks}
        for b in self.blocks:
            for s in b.successors():
                preds[s].append(b.label)
        return preds


@dataclass(eq=False)
class Program:
    functions: list[Function]
    entry: str = "main"
    func_table: list[str] = field(default_factory=list)
    input_len: int = 64

    def __post_init__(self):
        self.func_map = {f.name: f for f in self.functions}

    def function(self, name: str) -> Function:
        return self.func_map[name]

    def nodes(self) -> list[tuple[str, str]]:
        return [(f.name, b.label) for f in self.functions for b in f.blocks]

    def node_index(self) -> dict[tuple[str, str], int]:
        return {n: i for i, n in enumerate(self.nodes())}


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>;[^\n]*)
  | (?P<num>-?0[xX][0-9a-fA-F]+|-?\d+)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[{}(),:=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise IRSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


_SUFFIX_RE = re.compile(r"^([su]?)(\d+)$")


def _parse_type(text: str, tok: Tok) -> tuple[bool, int]:
    m = _SUFFIX_RE.match(text)
    if not m:
        raise IRSyntaxError(f"bad type suffix {text!r}", tok.line, tok.col)
    return m.group(1) == "s", int(m.group(2))


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k=0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        t = self.next()
        if t.text != text:
            raise IRSyntaxError(f"expected {text!r}, got {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def ident(self) -> Tok:
        t = self.next()
        if t.kind != "ident":
            raise IRSyntaxError(f"expected identifier, got {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def number(self) -> int:
        t = self.next()
        if t.kind != "num":
            raise IRSyntaxError(f"expected number, got {t.text!r}", t.line, t.col)
        return int(t.text, 0)

    def operand(self):
        t = self.next()
        if t.kind == "num":
            return int(t.text, 0)
        if t.kind == "ident":
            return t.text
        raise IRSyntaxError(f"expected operand, got {t.text or 'end of input'!r}", t.line, t.col)

    def operand_list(self) -> list:
        ops = [self.operand()]
        while self.peek().text == ",":
            self.next()
            ops.append(self.operand())
        return ops

    def starts_operand(self) -> bool:
        t = self.peek()
        if t.kind == "num":
            return True
        return t.kind == "ident" and self.peek(1).text != ":" and self.peek(1).text != "="

    # ---------------------------------------------------------------
    def program(self) -> Program:
        input_len, table, entry = 64, [], None
        funcs = []
        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "input":
                self.next()
                input_len = self.number()
            elif t.text == "table":
                self.next()
                table = [self.ident().text]
                while self.peek().text == ",":
                    self.next()
                    table.append(self.ident().text)
            elif t.text == "entry":
                self.next()
                entry = self.ident().text
            elif t.text == "func":
                funcs.append(self.function())
            else:
                raise IRSyntaxError(f"unexpected {t.text!r} at top level", t.line, t.col)
        if entry is None:
            entry = "main" if any(f.name == "main" for f in funcs) else (funcs[0].name if funcs else "main")
        return Program(funcs, entry, table, input_len)

    def function(self) -> Function:
        ftok = self.expect("func")
        name = self.ident().text
        self.expect("(")
        params, entry = [], None
        while self.peek().text != ")":
            t = self.ident()
            if t.text == "entry" and self.peek().text == "=":
                self.next()
                entry = self.ident().text
            else:
                self.expect(":")
                tt = self.ident()
                _, w = _parse_type(tt.text, tt)
                params.append((t.text, w))
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        ret_width = None
        if self.peek().kind == "arrow":
            self.next()
            tt = self.ident()
            _, ret_width = _parse_type(tt.text, tt)
        self.expect("{")
        blocks = []
        while self.peek().text != "}":
            blocks.append(self.block())
        self.expect("}")
        if entry is None:
            if not blocks:
                raise IRSyntaxError(f"function {name} has no blocks", ftok.line, ftok.col)
            entry = blocks[0].label
        return Function(name, params, blocks, entry, ret_width, line=ftok.line)

    def block(self) -> BasicBlock:
        lt = self.ident()
        self.expect(":")
        instrs = []
        while True:
            t = self.peek()
            if t.kind == "eof" or t.text == "}":
                raise IRSyntaxError(f"block {lt.text} has no terminator", lt.line, lt.col)
            if t.text in ("jmp", "br", "ret"):
                return BasicBlock(lt.text, instrs, self.terminator())
            if t.kind == "ident" and self.peek(1).text == ":":
                raise IRSyntaxError(f"block {lt.text} has no terminator", t.line, t.col)
            instrs.append(self.instr())

    def terminator(self):
        t = self.next()
        if t.text == "jmp":
            return Jmp(self.ident().text, t.line)
        if t.text == "br":
            cond = self.ident().text
            self.expect(",")
            a = self.ident().text
            self.expect(",")
            b = self.ident().text
            return Br(cond, a, b, t.line)
        if self.starts_operand():
            return Ret(self.operand(), t.line)
        return Ret(None, t.line)

    def instr(self) -> Instr:
        dest = None
        if self.peek(1).text == "=":
            dest = self.ident().text
            self.expect("=")
        mt = self.ident()
        return self._instr_body(dest, mt)

    def _instr_body(self, dest, mt: Tok) -> Instr:
        parts = mt.text.split(".")
        base, line = parts[0], mt.line

        def fail(msg):
            raise IRSyntaxError(msg, mt.line, mt.col)

        if base == "arr":
            if len(parts) < 2 or parts[1] not in ("alloc", "load", "store"):
                fail(f"unknown mnemonic {mt.text!r}")
            sub = parts[1]
            if sub == "alloc":
                width = 32
                if len(parts) == 3:
                    _, width = _parse_type(parts[2], mt)
                elif len(parts) > 3:
                    fail(f"bad mnemonic {mt.text!r}")
                size = self.number()
                return Instr("arr.alloc", dest, (size,), width, line=line)
            if len(parts) != 2:
                fail(f"bad mnemonic {mt.text!r}")
            return Instr("arr." + sub, dest, tuple(self.operand_list()), line=line)
        if base in ("call", "icall"):
            if len(parts) != 1:
                fail(f"bad mnemonic {mt.text!r}")
            if base == "call":
                callee = self.ident().text
                args = []
                if self.peek().text == ",":
                    self.next()
                    args = self.operand_list()
                return Instr("call", dest, tuple(args), callee=callee, line=line)
            return Instr("icall", dest, tuple(self.operand_list()), line=line)
        if base == "cmp":
            if len(parts) != 2 or parts[1] not in CMP_PREDS:
                fail(f"unknown comparison {mt.text!r}")
            return Instr("cmp", dest, tuple(self.operand_list()), pred=parts[1], line=line)
        if base == "in":
            if len(parts) != 2:
                fail(f"bad mnemonic {mt.text!r}")
            signed, width = _parse_type(parts[1], mt)
            return Instr("in", dest, (self.number(),), width, signed, line=line)
        if base in ("const",) + ARITH_OPS + SHIFT_OPS + BITWISE_OPS + CAST_OPS:
            if len(parts) != 2:
                fail(f"{base} needs a type suffix, e.g. {base}.u32")
            signed, width = _parse_type(parts[1], mt)
            if base == "const":
                return Instr("const", dest, (self.number(),), width, signed, line=line)
            return Instr(base, dest, tuple(self.operand_list()), width, signed, line=line)
        fail(f"unknown mnemonic {mt.text!r}")


def parse_program(text: str) -> Program:
    """Parse and validate IR text. Raises IRSyntaxError or ValidationError."""
    prog = _Parser(text).program()
    validate(prog)
    return prog


# --------------------------------------------------------------------------
# validation


def _fits(value: int, width: int) -> bool:
    return -(1 << (width - 1)) <= value < (1 << width)


def _norm(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


def validate(p: Program) -> None:
    """Type-check and normalize `p` in place (immediates become unsigned)."""
    if not p.functions:
        raise ValidationError("program has no functions")
    if len(p.func_map) != len(p.functions):
        raise ValidationError("duplicate function name")
    if p.entry not in p.func_map:
        raise ValidationError(f"entry function {p.entry!r} not defined")
    if p.input_len < 0:
        raise ValidationError("negative input length")
    for name in p.func_table:
        if name not in p.func_map:
            raise ValidationError(f"table entry {name!r} is not a function")
    if p.func_table:
        sigs = {(tuple(w for _, w in p.func_map[n].params), p.func_map[n].ret_width) for n in p.func_table}
        if len(sigs) > 1:
            raise ValidationError("functions in the call table must share one signature")
    for f in p.functions:
        _validate_function(p, f)


def _validate_function(p: Program, f: Function) -> None:
    if f.entry_block not in f.block_map:
        raise ValidationError(f"{f.name}: entry block {f.entry_block!r} not defined", f.line)
    if len(f.block_map) != len(f.blocks):
        raise ValidationError(f"{f.name}: duplicate block label", f.line)
    for b in f.blocks:
        for s in b.successors():
            if s not in f.block_map:
                raise ValidationError(f"{f.name}: unknown block {s!r}", b.term.line)
            if s == f.entry_block:
                raise ValidationError(f"{f.name}: branch into entry block {s!r}", b.term.line)

    types: dict[str, object] = {}

    def settype(reg, t, line):
        old = types.get(reg)
        if old is not None and old != t:
            raise ValidationError(f"{f.name}: register {reg} redefined with a different type", line)
        types[reg] = t

    for name, w in f.params:
        if w not in WIDTHS:
            raise ValidationError(f"{f.name}: bad parameter width {w}", f.line)
        settype(name, w, f.line)
    if f.ret_width is not None and f.ret_width not in WIDTHS:
        raise ValidationError(f"{f.name}: bad return width", f.line)

    # destination types are determined by the instruction alone, except
    # arr.load (needs the array type), handled in a second sweep
    pending = []
    for b in f.blocks:
        for ins in b.instrs:
            t = _dest_type(p, f, ins)
            if ins.dest is None:
                continue
            if t == "load":
                pending.append(ins)
            elif t is None:
                raise ValidationError(f"{f.name}: {ins.op} produces no value", ins.line)
            else:
                settype(ins.dest, t, ins.line)
    for ins in pending:
        at = types.get(ins.args[0]) if ins.args and isinstance(ins.args[0], str) else None
        if not isinstance(at, ArrType):
            raise ValidationError(f"{f.name}: arr.load from non-array", ins.line)
        settype(ins.dest, at.elem, ins.line)

    for b in f.blocks:
        new_instrs = [_check_instr(p, f, ins, types) for ins in b.instrs]
        b.instrs[:] = new_instrs
        t = b.term
        if isinstance(t, Br):
            if types.get(t.cond) != BOOL:
                raise ValidationError(f"{f.name}: branch condition {t.cond} is not boolean", t.line)
        elif isinstance(t, Ret):
            if t.value is None:
                if f.ret_width is not None:
                    raise ValidationError(f"{f.name}: missing return value", t.line)
            else:
                if f.ret_width is None:
                    raise ValidationError(f"{f.name}: returns a value but declares no return type", t.line)
                if isinstance(t.value, int):
                    if not _fits(t.value, f.ret_width):
                        raise ValidationError(f"{f.name}: immediate out of range", t.line)
                    b.term = Ret(_norm(t.value, f.ret_width), t.line)
                elif types.get(t.value) != f.ret_width:
                    raise ValidationError(f"{f.name}: return width mismatch", t.line)
    f.reg_types = types
    _check_definite_assignment(f)


def _dest_type(p, f, ins):
    op = ins.op
    if op in ("const", "in") + ARITH_OPS + SHIFT_OPS + CAST_OPS:
        if ins.width not in WIDTHS:
            raise ValidationError(f"{f.name}: bad width {ins.width}", ins.line)
        return ins.width
    if op in BITWISE_OPS:
        if ins.width not in WIDTHS + (BOOL,):
            raise ValidationError(f"{f.name}: bad width {ins.width}", ins.line)
        return ins.width
    if op == "cmp":
        return BOOL
    if op == "arr.alloc":
        if ins.width not in WIDTHS:
            raise ValidationError(f"{f.name}: bad element width", ins.line)
        if ins.args[0] <= 0:
            raise ValidationError(f"{f.name}: array size must be positive", ins.line)
        return ArrType(ins.width, ins.args[0])
    if op == "arr.load":
        return "load"
    if op == "arr.store":
        return None
    if op == "call":
        if ins.callee not in p.func_map:
            raise ValidationError(f"{f.name}: call to unknown function {ins.callee!r}", ins.line)
        return p.func_map[ins.callee].ret_width
    if op == "icall":
        if not p.func_table:
            raise ValidationError(f"{f.name}: icall without a call table", ins.line)
        return p.func_map[p.func_table[0]].ret_width
    raise ValidationError(f"{f.name}: unknown op {op}", ins.line)


def _check_instr(p, f, ins: Instr, types) -> Instr:
    def err(msg):
        raise ValidationError(f"{f.name}: {msg}", ins.line)

    def reg_type(r):
        if r not in types:
            err(f"unknown register {r}")
        return types[r]

    def value(a, width):
        """Check operand `a` against `width`; return normalized operand."""
        if isinstance(a, int):
            if not _fits(a, width):
                err(f"immediate {a} does not fit in {width} bits")
            return _norm(a, width)
        t = reg_type(a)
        if t != width:
            err(f"width mismatch: {a} has type {t}, expected {width}")
        return a

    def nargs(n):
        if len(ins.args) != n:
            err(f"{ins.op} expects {n} operands, got {len(ins.args)}")

    op = ins.op
    args = ins.args
    if op == "const":
        if not _fits(args[0], ins.width):
            err("constant out of range")
        args = (_norm(args[0], ins.width),)
    elif op == "in":
        if args[0] < 0 or args[0] + ins.width // 8 > p.input_len:
            err(f"input read at offset {args[0]} exceeds input length {p.input_len}")
    elif op in ARITH_OPS + SHIFT_OPS + BITWISE_OPS:
        nargs(2)
        args = tuple(value(a, ins.width) for a in args)
    elif op in CAST_OPS:
        nargs(1)
        src = args[0]
        if isinstance(src, int):
            err("cast of an immediate")
        sw = reg_type(src)
        if not isinstance(sw, int):
            err("cast of an array")
        if op == "trunc" and not ins.width < sw:
            err("trunc must narrow")
        if op in ("zext", "sext") and not ins.width > sw:
            err(f"{op} must widen")
    elif op == "cmp":
        nargs(2)
        ws = [reg_type(a) for a in args if isinstance(a, str)]
        if not ws:
            err("comparison needs at least one register operand")
        w = ws[0]
        if not isinstance(w, int) or w == BOOL and ins.pred not in ("eq", "ne"):
            err("comparison on non-integer operands")
        args = tuple(value(a, w) for a in args)
    elif op == "arr.alloc":
        pass
    elif op in ("arr.load", "arr.store"):
        nargs(2 if op == "arr.load" else 3)
        arr = args[0]
        at = reg_type(arr) if isinstance(arr, str) else None
        if not isinstance(at, ArrType):
            err(f"{op} on non-array operand")
        idx = args[1]
        if isinstance(idx, str):
            iw = reg_type(idx)
            if iw not in WIDTHS:
                err("array index must be an integer register")
        elif idx < 0:
            err("negative immediate index")
        if op == "arr.store":
            args = (arr, idx, value(args[2], at.elem))
    elif op in ("call", "icall"):
        if op == "call":
            callee = p.func_map[ins.callee]
            cargs = args
        else:
            callee = p.func_map[p.func_table[0]]
            if not args:
                err("icall needs an index operand")
            idx = args[0]
            if isinstance(idx, str) and reg_type(idx) not in WIDTHS:
                err("icall index must be an integer register")
            if isinstance(idx, int) and idx < 0:
                err("negative icall index")
            cargs = args[1:]
        if len(cargs) != len(callee.params):
            err(f"call to {callee.name} with {len(cargs)} arguments, expected {len(callee.params)}")
        cargs = tuple(value(a, w) for a, (_, w) in zip(cargs, callee.params))
        args = cargs if op == "call" else (args[0],) + cargs
        if ins.dest is not None and callee.ret_width is None:
            err(f"{callee.name} returns no value")
    if args != ins.args:
        ins = Instr(ins.op, ins.dest, args, ins.width, ins.signed, ins.pred, ins.callee, ins.line)
    return ins


def _check_definite_assignment(f: Function) -> None:
    preds = f.predecessors()
    order = reachable_blocks(f)
    all_regs = frozenset(f.reg_types)
    out: dict[str, frozenset] = {b: all_regs for b in order}
    params = frozenset(n for n, _ in f.params)
    changed = True
    while changed:
        changed = False
        for lbl in order:
            if lbl == f.entry_block:
                cur = params
            else:
                ins = [out[q] for q in preds[lbl] if q in out]
                cur = frozenset.intersection(*ins) if ins else all_regs
            defined = set(cur)
            for i in f.block(lbl).instrs:
                if i.dest is not None:
                    defined.add(i.dest)
            new = frozenset(defined)
            if new != out[lbl]:
                out[lbl] = new
                changed = True
    for lbl in order:
        if lbl == f.entry_block:
            defined = set(params)
        else:
            ins = [out[q] for q in preds[lbl] if q in out]
            defined = set(frozenset.intersection(*ins)) if ins else set()
        b = f.block(lbl)
        for i in b.instrs:
            for r in i.regs_used():
                if r not in defined:
                    raise ValidationError(f"{f.name}: register {r} may be used before assignment", i.line)
            if i.dest is not None:
                defined.add(i.dest)
        t = b.term
        used = [t.cond] if isinstance(t, Br) else ([t.value] if isinstance(t, Ret) and isinstance(t.value, str) else [])
        for r in used:
            if r not in defined:
                raise ValidationError(f"{f.name}: register {r} may be used before assignment", t.line)


def reachable_blocks(f: Function) -> list[str]:
    """Blocks reachable from the entry, in reverse postorder."""
    succ = f.successors()
    seen, post = {f.entry_block}, []
    stack = [(f.entry_block, iter(succ[f.entry_block]))]
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            post.append(node)
            stack.pop()
        elif nxt not in seen:
            seen.add(nxt)
            stack.append((nxt, iter(succ[nxt])))
    return post[::-1]


# --------------------------------------------------------------------------
# printing


def _type_suffix(signed: bool, width: int) -> str:
    return ("s" if signed else "u") + str(width)


def format_instr(i: Instr) -> str:
    args = ", ".join(str(a) if isinstance(a, str) else hex(a) if a > 9 else str(a) for a in i.args)
    if i.op == "arr.alloc":
        body = f"arr.alloc.u{i.width} {i.args[0]}"
    elif i.op in ("arr.load", "arr.store", "icall"):
        body = f"{i.op} {args}"
    elif i.op == "call":
        body = f"call {i.callee}" + (f", {args}" if args else "")
    elif i.op == "cmp":
        body = f"cmp.{i.pred} {args}"
    else:
        body = f"{i.op}.{_type_suffix(i.signed, i.width)} {args}"
    return f"{i.dest} = {body}" if i.dest else body


def format_program(p: Program) -> str:
    out = [f"input {p.input_len}"]
    if p.func_table:
        out.append("table " + ", ".join(p.func_table))
    out.append(f"entry {p.entry}")
    for f in p.functions:
        params = [f"{n}:u{w}" for n, w in f.params] + [f"entry={f.entry_block}"]
        ret = f" -> u{f.ret_width}" if f.ret_width else ""
        out.append(f"\nfunc {f.name}({', '.join(params)}){ret} {{")
        for b in f.blocks:
            out.append(f"{b.label}:")
            for i in b.instrs:
                out.append("  " + format_instr(i))
            t = b.term
            if isinstance(t, Jmp):
                out.append(f"  jmp {t.target}")
            elif isinstance(t, Br):
                out.append(f"  br {t.cond}, {t.then}, {t.other}")
            else:
                out.append("  ret" + ("" if t.value is None else f" {t.value}"))
        out.append("}")
    return "\n".join(out) + "\n"
