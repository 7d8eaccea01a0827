"""Command-line front end: ``tceer run|compare|trace``.

Positional arguments after the subcommand are the scenario file, the output
directory and any number of ``key=value`` overrides, in that order; the
``--config`` and ``--out`` flags do the same job.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import engine
from .config import ConfigError, format_config, load_config

log = logging.getLogger("tceer")


def _fmt_round(r) -> str:
    return "not reached" if r is None else str(r)


def _split_positionals(items: list[str]) -> tuple[list[str], list[str]]:
    paths, overrides = [], []
    for item in items:
        (overrides if "=" in item else paths).append(item)
    return paths, overrides


def _resolve(args) -> tuple:
    paths, overrides = _split_positionals(args.args)
    if len(paths) > 2:
        raise ConfigError("args", f"unexpected arguments {paths[2:]}")
    config = args.config or (paths[0] if paths else None)
    out = args.out or (paths[1] if len(paths) > 1 else None)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seed={args.seed}")
    return load_config(config, overrides), out


def _prepare_out(out) -> Path:
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    probe = p / ".write-test"
    probe.write_text("")
    probe.unlink()
    return p


def cmd_run(args) -> int:
    cfg, out = _resolve(args)
    out_dir = _prepare_out(out or "out")
    result = engine.run(cfg)
    engine.write_outputs(result, out_dir)
    (out_dir / "resolved-config.txt").write_text(format_config(cfg))
    life = result.lifetime()
    for level in engine.LIFETIME_LEVELS:
        print(f"rounds-to-{level}%-dead: {_fmt_round(life[level])}")
    return 0


def _r50_key(r):
    return float("inf") if r is None else r


def cmd_compare(args) -> int:
    cfg, out = _resolve(args)
    out_dir = _prepare_out(out or "out")
    seeds = args.seeds or list(range(1, 11))
    rows, wins, ties, losses = [], 0, 0, 0
    for seed in seeds:
        c = cfg.replace(seed=seed)
        ours = engine.run(c, stop_at_dead_pct=50, record_trust=False).lifetime()[50]
        base = engine.run_baseline(c, stop_at_dead_pct=50).lifetime()[50]
        rows.append((seed, ours, base))
        a, b = _r50_key(ours), _r50_key(base)
        wins += a > b
        ties += a == b
        losses += a < b
        log.info("seed %d: tceer r50=%s baseline r50=%s", seed, ours, base)
    lines = ["seed,tceer_r50,baseline_r50"]
    lines += [f"{s},{'NA' if a is None else a},{'NA' if b is None else b}" for s, a, b in rows]
    (out_dir / "compare.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "resolved-config.txt").write_text(format_config(cfg))
    print(f"tceer vs baseline rounds-to-50%-dead over {len(seeds)} seeds: "
          f"{wins} wins, {ties} ties, {losses} losses")
    return 0


def cmd_trace(args) -> int:
    cfg, out = _resolve(args)
    try:
        traces = engine.trace_source(cfg, args.source, args.packets,
                                     freeze=args.freeze_state, warmup=args.warmup)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    lines = [t.to_line() for t in traces]
    distinct = len({tuple(t.hops) for t in traces})
    for ln in lines:
        print(ln)
    print(f"distinct routes: {distinct}")
    if out:
        out_dir = _prepare_out(out)
        (out_dir / "trace.txt").write_text("\n".join(lines + [f"distinct,{distinct}"]) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tceer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("args", nargs="*", metavar="CONFIG OUT key=value",
                       help="scenario file, output directory, overrides")
        p.add_argument("--config", help="scenario file (key = value lines)")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("run", help="simulate TCEER and write CSV/trace outputs")
    common(p)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="TCEER vs greedy baseline over several seeds")
    common(p)
    p.add_argument("--seeds", type=lambda s: [int(x) for x in s.replace(",", " ").split()],
                   help="comma- or space-separated seeds (default 1..10)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="route a burst of packets from one source")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--source", type=int, default=24)
    p.add_argument("--packets", type=int, default=20)
    p.add_argument("--warmup", type=int, default=0,
                   help="ordinary rounds to simulate before the burst")
    p.add_argument("--freeze-state", action="store_true",
                   help="do not mutate energy, buffers, trust or attacker state")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TCEER_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    # overrides may follow option flags; argparse leaves those over
    stray = [x for x in extra if "=" not in x or x.startswith("-")]
    if stray:
        parser.error(f"unrecognized arguments: {' '.join(stray)}")
    args.args = args.args + extra
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
