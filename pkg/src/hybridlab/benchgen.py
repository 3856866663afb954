"""Synthetic benchmarks with planted, ground-truth bugs.

A generated program dispatches on input byte 0 to a set of handlers. Most
handlers are "filler": easy byte comparisons and an input-bounded loop the
fuzzer explores quickly. One handler hides a label-dense region behind a
32-bit magic comparison and another hides a label-sparse region behind a
different magic, mirroring a packet parser where one handler is far more
bug-prone than its sibling. Planted bugs sit inside those regions:

    v = in.u32 P
    d = xor.u32 v, MAGIC ^ 0x80000000
    t = sub.s32 d, 1            ; signed overflow iff v == MAGIC

so each plant fires exactly when its own 4-byte field holds its magic.
"""
from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import asdict, dataclass, field

from .interp import run_concrete
from .ir import parse_program
from .labels import place_labels

SIGN = 0x80000000


class GenerationError(ValueError):
    pass


@dataclass
class BenchSpec:
    seed: int = 0
    input_len: int = 64
    n_plants: int = 2
    dense_labels: int = 40
    density_skew: float = 10.0
    filler_handlers: int = 4
    filler_branches: int = 4
    sub_guards: int = 2
    icall_fraction: float = 0.3
    infeasible: int = 0
    trimmable_infeasible: bool = False


@dataclass
class PlantedBug:
    bug_id: int
    region: str
    offset: int
    magic: int
    input: bytes
    width: int = 32

    @property
    def magic_hex(self) -> str:
        return f"{self.magic:0{self.width // 4}x}"


@dataclass
class Manifest:
    plants: list[PlantedBug]
    infeasible: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bug_id", "offset", "magic_hex", "input_hex"])
        for b in self.plants:
            w.writerow([b.bug_id, b.offset, b.magic_hex, b.input.hex()])
        return buf.getvalue()

    def to_json(self) -> str:
        d = dict(self.meta)
        d["infeasible"] = self.infeasible
        d["plants"] = [{**asdict(b), "input": b.input.hex()} for b in self.plants]
        return json.dumps(d, indent=1, sort_keys=True)

    @classmethod
    def from_files(cls, csv_text: str, json_text: str | None = None) -> "Manifest":
        meta = json.loads(json_text) if json_text else {}
        regions = {p["bug_id"]: p for p in meta.get("plants", [])}
        plants = []
        for row in csv.DictReader(io.StringIO(csv_text)):
            bid = int(row["bug_id"])
            extra = regions.get(bid, {})
            plants.append(PlantedBug(bid, extra.get("region", ""), int(row["offset"]), int(row["magic_hex"], 16),
                                     bytes.fromhex(row["input_hex"]), extra.get("width", 32)))
        infeasible = meta.pop("infeasible", [])
        meta.pop("plants", None)
        return cls(plants, infeasible, meta)

    def region_bugs(self, region: str) -> list[int]:
        return [b.bug_id for b in self.plants if b.region == region]


def magic_byte(rng: random.Random) -> int:
    # far from 0 in both directions (byte arithmetic is +-35) and not a
    # boundary value the interesting-value mutation would splice in
    while True:
        b = rng.randint(36, 219)
        if b not in (0x7F, 0x80):
            return b


def magic(rng: random.Random, nbytes: int = 4) -> int:
    return int.from_bytes(bytes(magic_byte(rng) for _ in range(nbytes)), "little")


class _Emitter:
    """Accumulates IR text for one function with fresh register names."""

    def __init__(self, name: str, rng: random.Random, input_len: int):
        self.name = name
        self.rng = rng
        self.input_len = input_len
        self.blocks: list[tuple[str, list[str], str]] = []
        self.nreg = 0
        self.nblk = 0

    def reg(self) -> str:
        self.nreg += 1
        return f"v{self.nreg}"

    def label(self, hint: str = "b") -> str:
        self.nblk += 1
        return f"{hint}{self.nblk}"

    def block(self, label: str, instrs: list[str], term: str) -> None:
        self.blocks.append((label, instrs, term))

    def text(self) -> str:
        lines = [f"func {self.name}(entry={self.blocks[0][0]}) {{"]
        for label, instrs, term in self.blocks:
            lines.append(f"{label}:")
            lines.extend(f"  {i}" for i in instrs)
            lines.append(f"  {term}")
        lines.append("}")
        return "\n".join(lines)

    def scratch(self, width: int, avoid: set[int]) -> int:
        nb = width // 8
        for _ in range(200):
            o = self.rng.randrange(1, self.input_len - nb + 1)
            if not any(o + k in avoid for k in range(nb)):
                return o
        return self.rng.randrange(1, self.input_len - nb + 1)

    def labeled_op(self, instrs: list[str], avoid: set[int], arr: str | None) -> None:
        """Append one eligible instruction (one label) fed by input bytes."""
        kind = self.rng.choice(("uadd", "uadd", "umul", "sadd", "shl", "oob") if arr else ("uadd", "umul", "sadd", "shl"))
        a, r = self.reg(), self.reg()
        if kind == "uadd":
            instrs += [f"{a} = in.u8 {self.scratch(8, avoid)}", f"{r} = add.u8 {a}, {self.rng.randint(1, 255)}"]
        elif kind == "umul":
            instrs += [f"{a} = in.u16 {self.scratch(16, avoid)}", f"{r} = mul.u16 {a}, {self.rng.randint(2, 4000)}"]
        elif kind == "sadd":
            instrs += [f"{a} = in.u32 {self.scratch(32, avoid)}", f"{r} = add.s32 {a}, {self.rng.randint(1, 1 << 20)}"]
        elif kind == "shl":
            instrs += [f"{a} = in.u8 {self.scratch(8, avoid)}", f"{r} = shl.u8 {self.rng.randint(1, 255)}, {a}"]
        else:
            instrs += [f"{a} = in.u8 {self.scratch(8, avoid)}", f"{r} = arr.load {arr}, {a}"]


class _Builder:
    def __init__(self, spec: BenchSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.next_field = 4
        self.fields: set[int] = {0}
        self.funcs: list[_Emitter] = []
        self.plants: list[dict] = []
        self.infeasible: list[tuple[str, str, int]] = []

    def field(self, nbytes: int = 4) -> int:
        off = self.next_field
        if off + nbytes > self.spec.input_len:
            raise GenerationError("more guarded fields than the input length allows")
        self.next_field += 4
        self.fields.update(range(off, off + nbytes))
        return off

    def region(self, em: _Emitter, tag: str, n_labels: int, n_plants: int, sub_guards: int,
               guard_off: int, guard_magic: int, selector: int, exit_label: str) -> None:
        """Emit the guard block, the region behind it and a label-free tail."""
        rng = self.rng
        gblk, rblk = em.label(f"{tag}g"), em.label(f"{tag}r")
        g = em.reg()
        c = em.reg()
        em.block(gblk, [f"{g} = in.u32 {guard_off}", f"{c} = cmp.eq {g}, {guard_magic:#x}"], f"br {c}, {rblk}, {exit_label}")
        base = bytearray(self.spec.input_len)
        base[0] = selector
        base[guard_off:guard_off + 4] = guard_magic.to_bytes(4, "little")
        instrs: list[str] = []
        arr = em.reg()
        instrs.append(f"{arr} = arr.alloc {rng.choice((8, 16, 32))}")
        for _ in range(n_plants):
            off = self.field()
            m = magic(rng)
            v, d, t = em.reg(), em.reg(), em.reg()
            instrs += [f"{v} = in.u32 {off}", f"{d} = xor.u32 {v}, {m ^ SIGN:#x}"]
            idx = len(instrs)
            instrs.append(f"{t} = sub.s32 {d}, 1")
            gt = bytearray(base)
            gt[off:off + 4] = m.to_bytes(4, "little")
            self.plants.append(dict(fn=em.name, block=rblk, index=idx, region=tag, offset=off, magic=m, input=bytes(gt)))
        fill = n_labels - n_plants
        # split the remaining labels between the top level and nested sub-guards
        per = [fill]
        if sub_guards:
            share = fill // (sub_guards + 1)
            per = [fill - share * sub_guards] + [share] * sub_guards
        for _ in range(per[0]):
            em.labeled_op(instrs, self.fields, arr)
        cur_label, cur_instrs = rblk, instrs
        after = em.label(f"{tag}x")
        for k in range(sub_guards):
            off = self.field(2)
            m16 = magic(rng, 2)
            s, sc = em.reg(), em.reg()
            nxt = em.label(f"{tag}s")
            cur_instrs += [f"{s} = in.u16 {off}", f"{sc} = cmp.eq {s}, {m16:#x}"]
            em.block(cur_label, cur_instrs, f"br {sc}, {nxt}, {after}")
            cur_label, cur_instrs = nxt, []
            a2 = em.reg()
            cur_instrs.append(f"{a2} = arr.alloc 16")
            for _ in range(per[k + 1]):
                em.labeled_op(cur_instrs, self.fields, a2)
        em.block(cur_label, cur_instrs, f"jmp {after}")
        # label-free tail so reach counts stay attributable to the region
        t1, t2 = em.reg(), em.reg()
        em.block(after, [f"{t1} = in.u8 {guard_off}", f"{t2} = xor.u8 {t1}, {rng.randint(1, 255)}"], f"jmp {exit_label}")

    def guarded_handler(self, name: str, tag: str, selector: int, n_labels: int, n_plants: int, sub_guards: int):
        em = _Emitter(name, self.rng, self.spec.input_len)
        off = self.field()
        m = magic(self.rng)
        exit_label = em.label("ret")
        self.region(em, tag, n_labels, n_plants, sub_guards, off, m, selector, exit_label)
        em.block(exit_label, [], "ret")
        self.funcs.append(em)
        return dict(selector=selector, guard_offset=off, guard_magic=m, function=name)

    def filler_handler(self, name: str) -> None:
        rng = self.rng
        em = _Emitter(name, rng, self.spec.input_len)
        L = self.spec.input_len
        arr = em.reg()
        cur = em.label("f")
        instrs = [f"{arr} = arr.alloc 8"]
        for _ in range(self.spec.filler_branches):
            x, c = em.reg(), em.reg()
            yes, no = em.label("f"), em.label("f")
            off = rng.randrange(1, 4) if rng.random() < 0.5 else rng.randrange(1, L)
            pred = rng.choice(("ult", "eq", "ule"))
            k = rng.randint(2, 40) if pred != "eq" else rng.randint(1, 30)
            instrs += [f"{x} = in.u8 {off}", f"{c} = cmp.{pred} {x}, {k}"]
            em.block(cur, instrs, f"br {c}, {yes}, {no}")
            yi = []
            if rng.random() < 0.4:
                em.labeled_op(yi, self.fields, arr)
            em.block(yes, yi, f"jmp {no}")
            cur, instrs = no, []
        # input-bounded loop: many hit-count buckets for the fuzzer to find
        i, n, n32, m, lc = em.reg(), em.reg(), em.reg(), em.reg(), em.reg()
        head, body, done = em.label("l"), em.label("l"), em.label("l")
        instrs += [f"{i} = const.u32 0", f"{n} = in.u8 {rng.randrange(1, L)}", f"{n32} = zext.u32 {n}",
                   f"{m} = and.u32 {n32}, 255"]
        em.block(cur, instrs, f"jmp {head}")
        em.block(head, [f"{lc} = cmp.ult {i}, {m}"], f"br {lc}, {body}, {done}")
        em.block(body, [f"{i} = add.u32 {i}, 1"], f"jmp {head}")
        em.block(done, [], "ret")
        self.funcs.append(em)

    def infeasible_plant(self, em: _Emitter, gblk: str, entry_instrs: list[str], cont: str, width: int = 32) -> None:
        """Guard `x < k` (k <= 10) dominating `x + 2^(w-1)`, which needs x >= 2^(w-1)."""
        rng = self.rng
        off = self.field(width // 8) if width == 32 else 0
        x, c, t = em.reg(), em.reg(), em.reg()
        lab = em.label("q")
        target = lab
        if not self.spec.trimmable_infeasible:
            # an extra block in between breaks the immediate-dominator rule
            target = em.label("qm")
        em.block(gblk, entry_instrs + [f"{x} = in.u{width} {off}", f"{c} = cmp.ult {x}, {rng.randint(2, 10)}"],
                 f"br {c}, {target}, {cont}")
        if target != lab:
            em.block(target, [], f"jmp {lab}")
        em.block(lab, [f"{t} = add.u{width} {x}, {1 << (width - 1):#x}"], f"jmp {cont}")
        self.infeasible.append((em.name, lab, 0))

    def build(self) -> tuple[str, dict]:
        spec, rng = self.spec, self.rng
        n_dense = max(1, spec.n_plants - spec.n_plants // 2) if spec.n_plants else 0
        n_sparse = spec.n_plants - n_dense
        sparse_total = max(n_sparse, 1, int(spec.dense_labels // spec.density_skew))
        if spec.dense_labels < n_dense or sparse_total * spec.density_skew > spec.dense_labels:
            raise GenerationError("density skew cannot be met with these label counts")
        n_handlers = spec.filler_handlers + 2
        if n_handlers > 200:
            raise GenerationError("too many handlers")
        order = list(range(n_handlers))
        rng.shuffle(order)
        names = [f"h{k}" for k in range(n_handlers)]
        dense_k, sparse_k = order[0], order[1]
        meta = {}
        for k in range(n_handlers):
            if k == dense_k:
                meta["dense"] = self.guarded_handler(names[k], "d", k + 1, spec.dense_labels, n_dense, spec.sub_guards)
            elif k == sparse_k:
                meta["sparse"] = self.guarded_handler(names[k], "s", k + 1, sparse_total, n_sparse, 0)
            else:
                self.filler_handler(names[k])
        by_name = {em.name: em for em in self.funcs}
        self.funcs = [by_name[n] for n in names]
        # main: chain of selector comparisons
        em = _Emitter("main", rng, spec.input_len)
        sel = em.reg()
        table = [n for n in names if rng.random() < spec.icall_fraction]
        cur = em.label("m")
        done = em.label("done")
        instrs = [f"{sel} = in.u8 0"]
        for _ in range(spec.infeasible):
            nxt = em.label("m")
            self.infeasible_plant(em, cur, instrs, nxt)
            cur, instrs = nxt, []
        for k, name in enumerate(names):
            c = em.reg()
            call_blk, nxt = em.label("c"), em.label("m")
            em.block(cur, instrs + [f"{c} = cmp.eq {sel}, {k + 1}"], f"br {c}, {call_blk}, {nxt}")
            if name in table:
                em.block(call_blk, [f"icall {table.index(name)}"], f"jmp {done}")
            else:
                em.block(call_blk, [f"call {name}"], f"jmp {done}")
            cur, instrs = nxt, []
        em.block(cur, [], f"jmp {done}")
        em.block(done, [], "ret 0")
        main_text = em.text()
        parts = [f"input {spec.input_len}"]
        if table:
            parts.append("table " + ", ".join(table))
        parts.append(main_text.replace(") {", ") -> u32 {", 1))
        parts += [f.text() for f in self.funcs]
        meta["handlers"] = n_handlers
        meta["table"] = table
        return "\n\n".join(parts) + "\n", meta


def _finish(text: str, b: _Builder, meta: dict) -> tuple[str, Manifest]:
    p = parse_program(text)
    ls = place_labels(p)
    plants = []
    for d in b.plants:
        lab = ls.by_site[(d["fn"], d["block"], d["index"])]
        plants.append(PlantedBug(lab.id, d["region"], d["offset"], d["magic"], d["input"], d.get("width", 32)))
    infeasible = [ls.by_site[s].id for s in b.infeasible]
    ids = {pb.bug_id for pb in plants}
    for pb in plants:
        got = run_concrete(p, ls, pb.input).violated_ids() & ids
        if got != {pb.bug_id}:
            raise GenerationError(f"plant {pb.bug_id} not certified: replay triggered {sorted(got)}")
    regions: dict[str, list[int]] = {}
    for tag in ("d", "s"):
        fn = meta.get({"d": "dense", "s": "sparse"}[tag], {}).get("function")
        regions[tag] = [l.id for l in ls if l.function == fn]
    meta["region_labels"] = regions
    meta["n_labels"] = len(ls)
    return text, Manifest(plants, infeasible, meta)


def generate(spec: BenchSpec) -> tuple[str, Manifest]:
    """IR text plus ground-truth manifest; deterministic in ``spec.seed``."""
    b = _Builder(spec)
    text, meta = b.build()
    meta["seed"] = spec.seed
    return _finish(text, b, meta)


def plant_infeasible(spec: BenchSpec, trimmable: bool = False) -> tuple[str, Manifest]:
    """Benchmark with one extra label made unreachable-in-value by its guard."""
    s = BenchSpec(**{**asdict(spec), "infeasible": max(1, spec.infeasible), "trimmable_infeasible": trimmable})
    if s.input_len <= 2:
        return generate_small(s.seed, s.input_len, infeasible=True, trimmable=trimmable)
    return generate(s)


def generate_small(seed: int, input_len: int = 2, infeasible: bool = True, trimmable: bool = False,
                   extra_labels: int = 2) -> tuple[str, Manifest]:
    """Single-function program over 1-2 input bytes, small enough to enumerate.

    The plant uses a magic of the full input width; the infeasible label is
    certified by exhaustive enumeration.
    """
    from .exhaustive import exhaustive_violations

    if input_len not in (1, 2):
        raise GenerationError("small programs take 1 or 2 input bytes")
    rng = random.Random(seed)
    w = 8 * input_len
    spec = BenchSpec(seed=seed, input_len=input_len, n_plants=1, trimmable_infeasible=trimmable)
    b = _Builder(spec)
    em = _Emitter("main", rng, input_len)
    x, c = em.reg(), em.reg()
    m = magic(rng, input_len)
    h = 1 << (w - 1)
    entry, plant_blk, after = em.label("b"), em.label("b"), em.label("b")
    em.block(entry, [f"{x} = in.u{w} 0", f"{c} = cmp.eq {x}, {m:#x}"], f"br {c}, {plant_blk}, {after}")
    d, t = em.reg(), em.reg()
    em.block(plant_blk, [f"{d} = xor.u{w} {x}, {m ^ h:#x}", f"{t} = sub.s{w} {d}, 1"], f"jmp {after}")
    b.plants.append(dict(fn="main", block=plant_blk, index=1, region="d", offset=0, magic=m,
                         input=m.to_bytes(input_len, "little"), width=w))
    instrs: list[str] = []
    for _ in range(extra_labels):
        a, r = em.reg(), em.reg()
        o = rng.randrange(input_len)
        instrs += [f"{a} = in.u8 {o}", f"{r} = add.u8 {a}, {rng.randint(1, 255)}"]
    tail = em.label("b")
    if infeasible:
        b.infeasible_plant(em, after, instrs, tail, width=w)
    else:
        em.block(after, instrs, f"jmp {tail}")
    em.block(tail, [], "ret")
    text = f"input {input_len}\n\n" + em.text() + "\n"
    text, man = _finish(text, b, {"seed": seed, "small": True})
    if infeasible:
        p = parse_program(text)
        ls = place_labels(p)
        ex = exhaustive_violations(p, ls)
        if any(lid in ex.violations for lid in man.infeasible):
            raise GenerationError("infeasible plant is triggerable")
    return text, man
