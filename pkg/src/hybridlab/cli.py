"""Command-line entry point: ``hybridlab <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, fields

from .benchgen import BenchSpec, Manifest, generate, generate_small, plant_infeasible
from .coordinator import POLICIES, Campaign, CampaignConfig, branch_targets, score_seed, AttemptLedger
from .fuzz import INITIAL, Fuzzer
from .icfg import build_inter_cfg, compute_reach, format_reach
from .interp import run_concrete
from .ir import IRError, parse_program
from .labels import format_labels, place_labels
from .rngs import spawn
from .trim import trim_labels


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _load(path: str):
    with open(path) as fh:
        return parse_program(fh.read())


def _read_seed(path: str, as_hex: bool) -> bytes:
    if as_hex:
        return bytes.fromhex(path)
    with open(path, "rb") as fh:
        return fh.read()


def _manifest(path: str | None) -> Manifest | None:
    if not path:
        return None
    with open(path) as fh:
        csv_text = fh.read()
    js = os.path.splitext(path)[0] + ".json"
    json_text = open(js).read() if os.path.exists(js) else None
    return Manifest.from_files(csv_text, json_text)


def cmd_analyze(a, out) -> None:
    p = _load(a.program)
    ls = place_labels(p)
    evidence = {}
    if a.trim:
        ls, report = trim_labels(p, ls)
        evidence = {k: str(v) for k, v in report.trimmed.items()}
    if not (a.labels or a.trim or a.reach):
        a.labels = True
    if a.labels:
        out.write(format_labels(ls, evidence))
    elif a.trim:
        out.write(f"trimmed {len(report.trimmed)}/{report.total}\n")
        for lid in sorted(report.trimmed):
            out.write(f"{lid} {evidence[lid]}\n")
    if a.reach:
        cfg = build_inter_cfg(p)
        out.write(format_reach(compute_reach(cfg, ls), cfg.nodes))


def cmd_gen(a, out) -> None:
    if a.small:
        text, man = generate_small(a.seed, a.input_len or 2, infeasible=a.infeasible > 0, trimmable=a.trimmable)
    else:
        spec = BenchSpec(seed=a.seed, input_len=a.input_len or 64, n_plants=a.plants, dense_labels=a.dense_labels,
                         density_skew=a.skew, infeasible=a.infeasible, trimmable_infeasible=a.trimmable)
        text, man = plant_infeasible(spec, a.trimmable) if a.infeasible else generate(spec)
    if a.out is None:
        out.write(text)
        return
    os.makedirs(a.out, exist_ok=True)
    for name, body in (("prog.ir", text), ("manifest.csv", man.to_csv()), ("manifest.json", man.to_json())):
        with open(os.path.join(a.out, name), "w") as fh:
            fh.write(body)
    out.write(f"wrote {a.out}/prog.ir ({len(man.plants)} plants)\n")


def cmd_replay(a, out) -> None:
    p = _load(a.program)
    ls = place_labels(p)
    if a.trim:
        ls, _ = trim_labels(p, ls)
    data = _read_seed(a.seed, a.hex)
    tr = run_concrete(p, ls, data)
    names = p.nodes()
    out.write("trace " + " ".join(f"{f}:{b}" for f, b in (names[i] for i in tr.block_seq)) + "\n")
    for lid, vals in tr.violations:
        l = ls[lid]
        out.write(f"violation {lid} {l.family} {l.function}:{l.block}:{l.index}\n")
    out.write(f"status {tr.status} ret {tr.ret_code}\n")


def cmd_score(a, out) -> None:
    p = _load(a.program)
    ls, _ = trim_labels(p, place_labels(p))
    reach = compute_reach(build_inter_cfg(p), ls)
    fz = Fuzzer(p, ls, spawn(0, 1)[0])
    seeds = []
    if a.seeds:
        for name in sorted(os.listdir(a.seeds)):
            with open(os.path.join(a.seeds, name), "rb") as fh:
                seeds.append((name, fh.read()))
    else:
        seeds.append(("zero", bytes(p.input_len)))
    for name, data in seeds:
        fz.execute(data[: p.input_len] + bytes(max(0, p.input_len - len(data))), INITIAL, force=True)
    targets = branch_targets(p)
    ledger = AttemptLedger()
    for (name, _), s in zip(seeds, fz.queue):
        sc = score_seed(s, reach, ledger, fz.cov, targets)
        out.write(f"{name} n={sc.n} score={sc.score:.6f}\n")
        if a.verbose:
            for (site, d), L, S, w in sc.terms:
                out.write(f"  {site[0]}:{site[1]}:{'T' if d else 'F'} L={L} S={S} w={w:.6f}\n")


def cmd_run(a, out) -> None:
    p = _load(a.program)
    kv = read_config(a.config) if a.config else {}
    for f in fields(CampaignConfig):
        v = getattr(a, f.name, None)
        if v is not None:
            kv[f.name] = v
    if a.deterministic:
        kv["workers"], kv["async_mode"] = 1, False
    elif int(kv.get("workers", 1)) > 1:
        kv["async_mode"] = True
    if "rng" not in kv and not a.deterministic:
        kv["rng"] = int.from_bytes(os.urandom(4), "little")
    cfg = CampaignConfig.from_mapping(kv)
    man = _manifest(a.manifest)
    planted = {b.bug_id for b in man.plants} if man else set()
    if a.out:
        os.makedirs(a.out, exist_ok=True)
    c = Campaign(p, cfg, planted=planted, out_dir=a.out)
    stats = open(os.path.join(a.out, "stats.jsonl"), "w") if a.out else out
    try:
        c.run(lambda st: stats.write(st.to_json() + "\n"))
    finally:
        if stats is not out:
            stats.close()
    report = Campaign.format_report(c.bug_report())
    if a.out:
        with open(os.path.join(a.out, "bugs.csv"), "w") as fh:
            fh.write(report)
        with open(os.path.join(a.out, "config.txt"), "w") as fh:
            fh.write("".join(f"{k} = {v}\n" for k, v in asdict(cfg).items()))
    elif a.verbose:
        sys.stderr.write(report)


def cmd_plotdata(a, out) -> None:
    """Flatten stats streams into ``policy,run,round,labels_triggered,planted_triggered``."""
    out.write("policy,run,round,labels_triggered,planted_triggered\n")
    for path in a.stats:
        run = os.path.basename(os.path.dirname(path)) or os.path.basename(path)
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    r = json.loads(line)
                    out.write(f"{r['policy']},{run},{r['round']},{r['labels_triggered']},{r['planted_triggered']}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hybridlab")
    sub = ap.add_subparsers(dest="subcommand", parser_class=_Parser)

    s = sub.add_parser("analyze")
    s.add_argument("program")
    s.add_argument("--labels", action="store_true")
    s.add_argument("--trim", action="store_true")
    s.add_argument("--reach", action="store_true")

    s = sub.add_parser("gen")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--input-len", type=int)
    s.add_argument("--plants", type=int, default=2)
    s.add_argument("--dense-labels", type=int, default=40)
    s.add_argument("--skew", type=float, default=10.0)
    s.add_argument("--infeasible", type=int, default=0)
    s.add_argument("--trimmable", action="store_true")
    s.add_argument("--small", action="store_true")

    s = sub.add_parser("replay")
    s.add_argument("program")
    s.add_argument("seed")
    s.add_argument("--hex", action="store_true", help="seed argument is a hex string")
    s.add_argument("--trim", action="store_true")

    s = sub.add_parser("score")
    s.add_argument("program")
    s.add_argument("--seeds", help="directory of seed files")
    s.add_argument("-v", "--verbose", action="count", default=0)

    s = sub.add_parser("run")
    s.add_argument("program")
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--manifest")
    s.add_argument("--policy", choices=POLICIES)
    s.add_argument("--rounds", type=int)
    s.add_argument("--rng", type=int)
    s.add_argument("--deterministic", action="store_true")
    s.add_argument("--workers", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--tau", type=int)
    s.add_argument("--fuzz-execs", dest="fuzz_execs", type=int)
    s.add_argument("--stop", choices=("rounds", "all-planted", "any-planted"))
    s.add_argument("-v", "--verbose", action="count", default=0)

    s = sub.add_parser("plotdata")
    s.add_argument("stats", nargs="+", help="stats.jsonl files")
    return ap


COMMANDS = {"analyze": cmd_analyze, "gen": cmd_gen, "replay": cmd_replay, "score": cmd_score,
            "run": cmd_run, "plotdata": cmd_plotdata}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        a = build_parser().parse_args(argv)
        if not a.subcommand:
            raise UsageError("missing subcommand")
        COMMANDS[a.subcommand](a, out)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return 1
    except FileNotFoundError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return 1
    except (IRError, ValueError, OSError, KeyError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
