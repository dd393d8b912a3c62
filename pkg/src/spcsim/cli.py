"""Command-line front end: run scenarios, sweep parameters, compare cache modes.

Exit codes: 0 success, 1 runtime error, 2 configuration error.  All written
artifacts are a pure function of (scenario file, overrides, seed); wall-clock
measurements only ever go to stdout.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from pathlib import Path

from .scenario import InvalidConfig, ScenarioConfig, apply_override, load_scenario, parse_config
from .simulator import run_scenario, write_artifacts

SWEEP_PARAMETERS = {
    "lambda": "decision.lambda",
    "merge": "cache.merge",
    "dissemination": "cache.dissemination.policy",
    "invalidation": "cache.invalidation.policy",
    "theta": "cache.theta",
    "capacity": "cache.capacity",
}

COMPARE_MODES = ("aco", "cache_local", "cache_collab")


def _load_doc(path: str) -> tuple[dict, Path]:
    p = Path(path)
    if not p.exists():
        raise InvalidConfig("$", f"scenario file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfig("$", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidConfig("$", "scenario must be a JSON object")
    return doc, p.parent


def _parse_set(values) -> list[tuple[str, object]]:
    out = []
    for item in values or []:
        if "=" not in item:
            raise InvalidConfig("--set", f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        out.append((key, val))
    return out


def _config_from_args(args) -> ScenarioConfig:
    doc, base = _load_doc(args.config)
    for key, val in _parse_set(args.set):
        apply_override(doc, key, val)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = parse_config(doc, base_dir=base)
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _say(args, msg: str):
    if not args.quiet:
        print(msg)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    metrics = run_scenario(cfg)
    csv_path, json_path = write_artifacts(metrics, cfg.out_dir)
    _say(args, f"runs: {metrics.n_runs}  aborted: {metrics.aborted_runs}  "
               f"offload failures: {metrics.offload_failures}")
    _say(args, f"mean end-to-end per app: "
               + ", ".join(f"{a}={v:.1f}ms" for a, v in sorted(metrics.app_end_to_end_ms.items())))
    _say(args, f"cache hit rate: {metrics.cache_hit_rate_pct:.1f}%  "
               f"decision overhead mean: {metrics.decision_sim_ms_mean:.3f}ms simulated "
               f"({metrics.decision_wall_ms_mean:.3f}ms wall)")
    if metrics.horizon_exceeded:
        _say(args, "warning: horizon reached before the workload completed")
    _say(args, f"wrote {csv_path} and {json_path}")
    return 0


def cmd_validate(args) -> int:
    _config_from_args(args)
    _say(args, "configuration OK")
    return 0


def _summary_metrics(metrics) -> dict:
    total_methods = sum(r.n_methods for r in metrics.rows)
    total_offl = sum(r.n_offloaded for r in metrics.rows)
    return {
        "n_runs": metrics.n_runs,
        "end_to_end_ms_mean": (
            sum(r.end_to_end_ms for r in metrics.rows) / metrics.n_runs if metrics.n_runs else 0.0
        ),
        "decision_ms_mean_per_call": metrics.decision_sim_ms_mean,
        "cache_hit_rate_pct": metrics.cache_hit_rate_pct,
        "offload_rate_pct": 100.0 * total_offl / total_methods if total_methods else 0.0,
        "messages_total": sum(metrics.message_counts.values()),
    }


def cmd_sweep(args) -> int:
    if args.parameter not in SWEEP_PARAMETERS:
        raise InvalidConfig("parameter", f"unknown sweep parameter {args.parameter!r}; "
                                         f"known: {sorted(SWEEP_PARAMETERS)}")
    doc, base = _load_doc(args.config)
    for key, val in _parse_set(args.set):
        apply_override(doc, key, val)
    if args.seed is not None:
        doc["seed"] = args.seed

    rows = []
    for raw in args.values:
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        variant = copy.deepcopy(doc)
        apply_override(variant, SWEEP_PARAMETERS[args.parameter], val)
        cfg = parse_config(variant, base_dir=base)
        metrics = run_scenario(cfg)
        rows.append((val, _summary_metrics(metrics)))

    out_dir = Path(args.out if args.out is not None else (doc.get("output", {}) or {}).get("dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep.csv"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["parameter", "value", "n_runs", "end_to_end_ms_mean", "decision_ms_mean_per_call",
            "cache_hit_rate_pct", "offload_rate_pct", "messages_total"]
    w.writerow(cols)
    for val, s in rows:
        w.writerow([
            args.parameter, val, s["n_runs"],
            format(s["end_to_end_ms_mean"], ".6f"),
            format(s["decision_ms_mean_per_call"], ".6f"),
            format(s["cache_hit_rate_pct"], ".6f"),
            format(s["offload_rate_pct"], ".6f"),
            s["messages_total"],
        ])
    path.write_text(buf.getvalue())
    _say(args, buf.getvalue().rstrip())
    _say(args, f"wrote {path}")
    return 0


def compare_cache_modes(config: ScenarioConfig) -> list[dict]:
    """Per-app decision overhead and end-to-end time under each decision mode.

    The scenario must contain a warm-up phase (apps run by the source device)
    and a measurement phase (apps run by other devices); reported numbers
    cover the measurement phase only.
    """
    src = config.source_device().id
    if not any(a.runner != src for a in config.apps):
        raise InvalidConfig("apps", "compare-cache-modes needs apps run by non-source devices "
                                    "(the measurement phase)")
    if not any(a.runner == src for a in config.apps):
        raise InvalidConfig("apps", "compare-cache-modes needs a warm-up phase run by the source")

    table: list[dict] = []
    per_app_mode: dict[tuple[str, str], dict] = {}
    for mode in COMPARE_MODES:
        cfg = copy.deepcopy(config)
        cfg.mode = mode
        metrics = run_scenario(cfg)
        phase2 = [r for r in metrics.rows if r.runner != src]
        for app in sorted({r.app for r in phase2}):
            rs = [r for r in phase2 if r.app == app]
            looked = sum(r.cache_hits + r.cache_misses for r in rs)
            rec = {
                "app": app,
                "mode": mode,
                "phase2_runs": len(rs),
                "decision_overhead_ms": sum(r.decision_ms for r in rs) / len(rs),
                "end_to_end_ms": sum(r.end_to_end_ms for r in rs) / len(rs),
                "cache_hit_rate_pct": (
                    100.0 * sum(r.cache_hits for r in rs) / looked if looked else 0.0
                ),
                "decision_gain_vs_local_pct": "",
            }
            per_app_mode[(app, mode)] = rec
            table.append(rec)
    for (app, mode), rec in per_app_mode.items():
        if mode == "cache_collab":
            local = per_app_mode.get((app, "cache_local"))
            if local and local["decision_overhead_ms"] > 0:
                gain = 100.0 * (1.0 - rec["decision_overhead_ms"] / local["decision_overhead_ms"])
                rec["decision_gain_vs_local_pct"] = round(gain, 6)
    return table


def cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    table = compare_cache_modes(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "compare.csv"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["app", "mode", "phase2_runs", "decision_overhead_ms", "end_to_end_ms",
            "cache_hit_rate_pct", "decision_gain_vs_local_pct"]
    w.writerow(cols)
    for rec in table:
        w.writerow([
            rec["app"], rec["mode"], rec["phase2_runs"],
            format(rec["decision_overhead_ms"], ".6f"),
            format(rec["end_to_end_ms"], ".6f"),
            format(rec["cache_hit_rate_pct"], ".6f"),
            rec["decision_gain_vs_local_pct"],
        ])
    path.write_text(buf.getvalue())
    _say(args, buf.getvalue().rstrip())
    _say(args, f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spcsim",
        description="Offloading decision engine and proximity-cloud simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario file (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--out", default=None, help="output directory for artifacts")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field by dotted path (value parsed as JSON)")
        p.add_argument("--quiet", action="store_true", help="suppress the stdout summary")

    p_run = sub.add_parser("run", help="run one scenario, write runs.csv and metrics.json")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenario once per parameter value")
    common(p_sweep)
    p_sweep.add_argument("--parameter", required=True, choices=sorted(SWEEP_PARAMETERS))
    p_sweep.add_argument("--values", nargs="+", required=True,
                         help="parameter values (each parsed as JSON when possible)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare-cache-modes",
                           help="compare aco / cache_local / cache_collab on one scenario")
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a scenario file and exit")
    common(p_val)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
