"""Command-line front end: calibrate, run, sweep, validate.

All outputs are plain data (JSON, JSON-lines, CSV) meant for scripts and
external plotting; nothing is rendered here.
"""

import argparse
import dataclasses
import json
import os
import sys

from .config import PRESETS, preset_config
from .costmodel import cost_model_sweep, write_sweep_csv
from .errors import ConfigurationError, PageSelError
from .runconfig import RunConfig
from .simulate import (
    collect_page_uncertainties,
    run_decode_loop,
    selection_overhead_profile,
)
from .uncertainty import calibrate, check_trigger, load_thresholds, save_thresholds


def _load_config(args):
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        cfg.workload = dataclasses.replace(cfg.workload, seed=args.seed)
    if args.out is not None:
        cfg.output_dir = args.out
    if args.policy is not None:
        cfg.policy = args.policy
    if args.preset is not None:
        cfg.selection = preset_config(
            args.preset,
            page_size=cfg.selection.page_size,
            pages_per_chunk=cfg.selection.pages_per_chunk,
            chunks_per_grid=cfg.selection.chunks_per_grid,
            window_pages=cfg.selection.window_pages,
            sink_pages=cfg.selection.sink_pages,
        )
    return cfg


def _thresholds_path(cfg):
    return cfg.thresholds_path or os.path.join(cfg.output_dir, "thresholds.json")


def cmd_validate(args):
    _load_config(args)
    print("config ok")
    return 0


def cmd_calibrate(args):
    cfg = _load_config(args)
    spec = dataclasses.replace(
        cfg.workload,
        generation_pages=cfg.calibration_pages,
        instability_schedule=(),
    )
    samples = collect_page_uncertainties(spec)
    thresholds = calibrate(samples, cfg.calibration_percentile)
    exceed = sum(check_trigger(s, thresholds) for s in samples) / len(samples)

    os.makedirs(cfg.output_dir, exist_ok=True)
    path = _thresholds_path(cfg)
    save_thresholds(thresholds, path, created_from=spec.workload_id)
    print(
        f"calibrated on {thresholds.sample_count} pages at "
        f"percentile {thresholds.percentile}: "
        f"tau_H={thresholds.tau_entropy:.6f} nats, "
        f"tau_V={thresholds.tau_varentropy:.6f} nats^2, "
        f"joint exceedance rate {exceed:.4f}"
    )
    print(f"wrote {path}")
    return 0


def _resolve_thresholds(cfg, policy):
    if not policy.startswith("dynamic"):
        return None
    path = _thresholds_path(cfg)
    if not os.path.exists(path):
        raise ConfigurationError(
            f"policy 'dynamic' needs thresholds at {path}; "
            f"run 'pagesel calibrate --config ...' first"
        )
    return load_thresholds(path)


def cmd_run(args):
    cfg = _load_config(args)
    thresholds = _resolve_thresholds(cfg, cfg.policy)
    if args.dry_run:
        print("config ok (dry run, nothing written)")
        return 0
    report = run_decode_loop(
        cfg.workload, cfg.selection, cfg.policy, thresholds, cfg.trigger_mode
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    report.write_jsonl(os.path.join(cfg.output_dir, "trace.jsonl"))
    if report.steps:
        report.write_csv(os.path.join(cfg.output_dir, "steps.csv"))
    summary = report.summary()
    summary["selection_overhead_fraction"] = selection_overhead_profile(report)
    with open(os.path.join(cfg.output_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    print(json.dumps(summary, indent=2))
    return 0


def _sweep_budget(cfg, values, thresholds):
    rows = []
    for preset in values:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r} in sweep values")
        selection = preset_config(
            preset,
            page_size=cfg.selection.page_size,
            pages_per_chunk=cfg.selection.pages_per_chunk,
            chunks_per_grid=cfg.selection.chunks_per_grid,
            window_pages=cfg.selection.window_pages,
            sink_pages=cfg.selection.sink_pages,
        )
        report = run_decode_loop(
            cfg.workload, selection, cfg.policy, thresholds, cfg.trigger_mode
        )
        rg, rc, rp = selection.ratios
        rows.append(
            {
                "preset": preset,
                "ratio_product": rg * rc * rp,
                "mean_budget_semantic": report.mean_budget_semantic,
                "mean_budget_total": report.mean_budget_total,
                "mean_recall": report.mean_recall,
                "trigger_count": report.trigger_count,
            }
        )
    return rows


def _sweep_policy(cfg, values, args):
    rows = []
    for policy in values:
        thresholds = _resolve_thresholds(cfg, policy)
        report = run_decode_loop(
            cfg.workload, cfg.selection, policy, thresholds, cfg.trigger_mode
        )
        rows.append(
            {
                "policy": policy,
                "trigger_count": report.trigger_count,
                "mean_inter_trigger_gap": report.mean_inter_trigger_gap,
                "mean_recall": report.mean_recall,
                "mean_budget_total": report.mean_budget_total,
            }
        )
    return rows


def cmd_sweep(args):
    cfg = _load_config(args)
    axis, values = cfg.sweep_axis, cfg.sweep_values
    if axis is None or not values:
        raise ConfigurationError("sweep needs a 'sweep' section with axis and values")
    if axis == "context_length":
        rows = cost_model_sweep(cfg.cost_model, [int(v) for v in values])
    elif axis == "budget":
        thresholds = _resolve_thresholds(cfg, cfg.policy)
        rows = _sweep_budget(cfg, values, thresholds)
    else:
        rows = _sweep_policy(cfg, values, args)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"sweep_{axis}.csv")
    write_sweep_csv(rows, path)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pagesel",
        description="Page-aligned KV-cache selection simulator and tools",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to JSON run config")
    common.add_argument("--seed", type=int, help="override workload seed")
    common.add_argument("--out", help="override output directory")
    common.add_argument("--policy", help="override trigger policy")
    common.add_argument("--preset", choices=sorted(PRESETS), help="override ratio preset")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common]).set_defaults(func=cmd_validate)
    sub.add_parser("calibrate", parents=[common]).set_defaults(func=cmd_calibrate)
    run = sub.add_parser("run", parents=[common])
    run.add_argument("--dry-run", action="store_true", help="validate only")
    run.set_defaults(func=cmd_run)
    sub.add_parser("sweep", parents=[common]).set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PageSelError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
