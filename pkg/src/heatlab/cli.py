"""Command line: ``heatlab run <config.json> [--out DIR] [--threads N]`` and ``heatlab list``.

Exit codes: 0 all checks passed, 1 config or IO error, 2 an asserted
invariant failed, 3 an expected-failure check did not fail.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import jsonschema

from . import __version__
from .errors import ConfigError, HeatlabError
from .experiments import EXAMPLES, PARAM_SCHEMAS, RUNNERS, SPACE_SCHEMA, Context, resolve_space
from .files import fmt, load_json, write_csv

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": sorted(RUNNERS)},
        "space": SPACE_SCHEMA,
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}


def validate_config(cfg) -> None:
    """Schema check of the envelope and of the kind-specific parameters."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        jsonschema.validate(cfg.get("params", {}), PARAM_SCHEMAS[cfg["kind"]])
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc


def _versions() -> dict:
    out = {"heatlab": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "scipy", "cvxpy", "jsonschema"):
        try:
            out[pkg] = version(pkg)
        except PackageNotFoundError:
            out[pkg] = None
    return out


def _threads(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("HEATLAB_THREADS", "").strip()
    if not env:
        return 1
    try:
        n = int(env)
    except ValueError as exc:
        raise ConfigError(f"HEATLAB_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ConfigError("HEATLAB_THREADS must be at least 1")
    return n


def _jsonable(x):
    if isinstance(x, float) and x != x:
        return None
    if isinstance(x, float) and x in (float("inf"), float("-inf")):
        return fmt(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def run(config_path, out=None, threads=None) -> int:
    t0 = time.perf_counter()
    config_path = Path(config_path)
    cfg = load_json(config_path)
    validate_config(cfg)
    kind = cfg["kind"]
    base = config_path.parent
    ctx = Context(resolve_space(kind, cfg.get("space"), base), cfg.get("seed", 0), _threads(threads), base)
    outcome = RUNNERS[kind](ctx, cfg.get("params", {}))

    out_dir = Path(out or cfg.get("out") or "results")
    code = outcome.exit_code
    summary = {
        "kind": kind,
        "config": cfg,
        "versions": _versions(),
        "seed": ctx.seed,
        "threads": ctx.threads,
        "wall_time_s": time.perf_counter() - t0,
        "exit_code": code,
        "checks": [{"name": c.name, "status": c.status, **c.detail} for c in outcome.checks],
        "summary": outcome.summary,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(out_dir / "results.csv", outcome.columns, outcome.rows)
        (out_dir / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write outputs to {out_dir}: {exc}") from exc
    return code


def list_experiments() -> str:
    lines = []
    for kind in sorted(RUNNERS):
        lines.append(kind)
        lines.append("  params: " + json.dumps(PARAM_SCHEMAS[kind], sort_keys=True))
        lines.append("  example: " + json.dumps({"kind": kind, **EXAMPLES[kind]}, sort_keys=True))
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors (exit 1); argparse would use 2, which means an invariant failed
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = _Parser(prog="heatlab", description="Short-time heat kernel and path energy experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (default: config 'out' or ./results)")
    p_run.add_argument("--threads", type=int, help="worker threads (fallback: HEATLAB_THREADS)")
    sub.add_parser("list", help="list experiment kinds and their parameter schemas")
    args = parser.parse_args(argv)

    if args.command == "list":
        print(list_experiments())
        return 0
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        code = run(args.config, args.out, args.threads)
    except (HeatlabError, ValueError) as exc:
        # parameters that pass the schema but are rejected by a module are still config errors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    status = {0: "all checks passed", 2: "an asserted invariant failed", 3: "an expected failure did not occur"}[code]
    print(status)
    return code


if __name__ == "__main__":
    sys.exit(main())
