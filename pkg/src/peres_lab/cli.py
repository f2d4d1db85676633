"""``peres-lab run <config.json>`` and ``peres-lab emit-plot <result.json>``.

Exit codes: 0 all invariants pass, 1 an invariant (or numerical check) failed,
2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import lab

ROOT_KEYS = {"scenario", "parameters", "output", "formats", "seed"}


def apply_override(doc: dict, item: str) -> None:
    if "=" not in item:
        raise lab.ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    parts = key.split(".")
    if parts[0] not in ROOT_KEYS:
        parts = ["parameters", *parts]
    node = doc
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise lab.ConfigError(f"--set {key}: {p!r} is not an object")
        node = nxt
    node[parts[-1]] = value


def _run(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        for item in args.set or []:
            apply_override(doc, item)
        cfg = lab.ScenarioConfig.from_dict(doc)
        out = lab.resolve_output(cfg, args.out)
    except (OSError, ValueError) as exc:
        print(f"peres-lab: input error: {exc}", file=sys.stderr)
        return 2
    try:
        result = lab.run(cfg)
    except lab.ConfigError as exc:
        print(f"peres-lab: input error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"peres-lab: {cfg.scenario} failed during computation: {exc}", file=sys.stderr)
        return 1
    lab.write_outputs(result, cfg, out)
    for name, inv in result.invariants.items():
        status = "PASS" if inv["passed"] else "FAIL"
        print(f"{status}  {name}: value={inv['value']!r} threshold={inv['threshold']!r}")
    print(f"{cfg.scenario}: {'all invariants pass' if result.passed else 'invariant failure'}"
          f" ({result.wall_time:.2f} s) -> {out}")
    return 0 if result.passed else 1


def _emit(args) -> int:
    try:
        doc = json.loads(Path(args.result).read_text())
    except (OSError, ValueError) as exc:
        print(f"peres-lab: cannot read result: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(args.result).parent
    try:
        paths = lab.emit_plot_data(doc, args.kind, out)
    except (ValueError, OSError) as exc:
        print(f"peres-lab: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peres-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario from a JSON config")
    r.add_argument("config")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry (dotted keys; bare keys go to parameters)")
    r.add_argument("--out", help=f"output directory (default: config 'output', ${lab.OUTPUT_ENV})")
    r.set_defaults(func=_run)
    e = sub.add_parser("emit-plot", help="write plot-ready columns from a result.json")
    e.add_argument("result")
    e.add_argument("--kind", required=True, choices=sorted(lab.PLOT_KINDS))
    e.add_argument("--out")
    e.set_defaults(func=_emit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
