"""Command-line entry point.

``qrmlab run <config>`` executes a scenario and writes ``<scenario>.csv`` (or
``.json``) plus ``<scenario>.meta.json`` into the output directory;
``qrmlab check`` validates only; ``qrmlab assumptions`` prints the tripartite
genericity report. Exit codes: 0 success, 2 config error, 3 assumption
failure, 4 numerical degeneracy.

Output is deterministic: no timestamps, floats with 17 significant digits,
grid rows merged by index regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from pathlib import Path

from . import __version__, models, scenarios, tripartite
from .errors import AssumptionError, ConfigError, ContractError, DegeneracyError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSUMPTION = 3
EXIT_DEGENERACY = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def load_config(path: str) -> scenarios.ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return scenarios.validate_config(raw)


def _meta(cfg: scenarios.ScenarioConfig, result: scenarios.ScenarioResult) -> dict:
    return {
        "tool": "qrmlab",
        "version": __version__,
        "scenario": cfg.scenario,
        "parameters": cfg.parameters,
        "grid": [
            {"name": ax.name, "min": ax.min, "max": ax.max, "points": ax.points, "scale": ax.scale}
            for ax in cfg.grid
        ],
        "columns": result.columns,
        "reference_loci": result.reference_loci,
    }


def _write_csv(path: Path, cfg: scenarios.ScenarioConfig, result: scenarios.ScenarioResult):
    lines = [f"# tool: qrmlab {__version__}", f"# scenario: {cfg.scenario}"]
    lines.append(
        "# parameters: " + json.dumps(cfg.parameters, sort_keys=True, separators=(",", ":"))
    )
    for ax in cfg.grid:
        lines.append(
            f"# axis {ax.name}: min={_fmt(ax.min)} max={_fmt(ax.max)} "
            f"points={ax.points} scale={ax.scale}"
        )
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, result: scenarios.ScenarioResult):
    if result.payload is not None:
        body = result.payload
    else:
        body = {"columns": result.columns, "rows": [list(r) for r in result.rows]}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def write_outputs(cfg: scenarios.ScenarioConfig, result: scenarios.ScenarioResult, out_dir: str):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.output_format == "csv" and result.payload is None:
        data_path = out / f"{cfg.scenario}.csv"
        _write_csv(data_path, cfg, result)
    else:
        data_path = out / f"{cfg.scenario}.json"
        _write_json(data_path, result)
    meta_path = out / f"{cfg.scenario}.meta.json"
    meta_path.write_text(json.dumps(_meta(cfg, result), indent=2, sort_keys=True) + "\n")
    return data_path, meta_path


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("QRMLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QRMLAB_THREADS: expected an integer, got {env!r}")
    return 1


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out if args.out is not None else cfg.output_path
    result = scenarios.run(cfg, threads=_threads(args))
    data_path, meta_path = write_outputs(cfg, result, out_dir)
    print(f"wrote {data_path} and {meta_path}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: scenario {cfg.scenario}, {len(cfg.grid)} grid axes")
    return EXIT_OK


def _cmd_assumptions(args) -> int:
    cfg = load_config(args.config)
    pars = cfg.parameters
    p = models.ThreeQubitParams(
        e_a=float(pars["e_A"]),
        e_c=float(pars["e_C"]),
        e_b=float(pars["e_B"]),
        u=float(pars["U"]),
        j_alpha=float(pars["J_alpha"]),
        j_beta=float(pars["J_beta"]),
        t_a=float(pars["t_A"]),
        t_b=float(pars["t_B"]),
        gamma_a=float(pars["gamma_A"]),
        gamma_b=float(pars["gamma_B"]),
        g=float(pars.get("g", 0.0)),
    )
    report = tripartite.check_assumptions(models.build_three_qubit(p))
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrmlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qrmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its outputs")
    run_p.add_argument("config", help="scenario configuration file (json)")
    run_p.add_argument("--out", default=None, help="output directory (overrides config)")
    run_p.add_argument("--threads", type=int, default=None, help="grid-point worker threads")
    run_p.set_defaults(func=_cmd_run)

    check_p = sub.add_parser("check", help="validate a configuration file")
    check_p.add_argument("config")
    check_p.set_defaults(func=_cmd_check)

    asm_p = sub.add_parser("assumptions", help="print the tripartite assumption report")
    asm_p.add_argument("config")
    asm_p.set_defaults(func=_cmd_assumptions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"config error: missing parameter {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except AssumptionError as exc:
        print(f"assumption failure: {exc}", file=_sys.stderr)
        return EXIT_ASSUMPTION
    except DegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=_sys.stderr)
        return EXIT_DEGENERACY
    except ContractError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
