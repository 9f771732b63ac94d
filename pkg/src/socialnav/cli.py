"""Command-line entry point: single runs, paired comparisons, classifier data.

Exit codes: 0 ok, 2 invalid scenario or arguments, 3 a run ended Stuck.
Every file written here is byte-deterministic for fixed inputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import context as ctx
from .pareto import rank_candidates, weighted_sum_select
from .render import render_svg
from .scenario import load_scenario
from .sim import (STUCK, reference_social_goal, run_scenario,
                  settings_for, trajectory_csv)
from .world import ConfigError, wrap_angle

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_STUCK = 3

CONCAVE_SET = ((0.0, 1.0), (1.0, 0.0), (0.4, 0.4), (0.9, 0.9))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _ratio(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None or b == 0:
        return None
    return a / b


# -- comparison report ----------------------------------------------------------

def trajectory_deviation(log_a, log_b):
    """Max position and heading gap, step by step.

    The shorter run is held at its final pose, so runs of different length
    never count as identical.
    """
    a, b = log_a.poses(), log_b.poses()
    n = max(len(a), len(b))
    a = np.vstack([a, np.repeat(a[-1:], n - len(a), axis=0)])
    b = np.vstack([b, np.repeat(b[-1:], n - len(b), axis=0)])
    pos = float(np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1]).max())
    head = max(abs(wrap_angle(float(x - y))) for x, y in zip(a[:, 2], b[:, 2]))
    return pos, float(head)


def verdicts(name: str, trad: dict, pac: dict, identical: bool) -> dict:
    """Pass/fail flags matching the behavioural acceptance checks."""
    flags = {"modes_identical": identical}
    if name == "hallway_human_vs_object":
        ph, po = pac["min_human_clearance"], pac["min_obstacle_clearance"]
        th, to = trad["min_human_clearance"], trad["min_obstacle_clearance"]
        flags["paccet_human_clearance_ge_1_5x_obstacle"] = bool(
            ph is not None and po is not None and ph >= 1.5 * po)
        flags["traditional_clearances_within_20pct"] = bool(
            th is not None and to is not None and abs(th - to) < 0.2 * max(th, to))
        flags["pass"] = (flags["paccet_human_clearance_ge_1_5x_obstacle"]
                         and flags["traditional_clearances_within_20pct"])
    elif name == "tight_passage":
        ph, po = pac["min_human_clearance"], pac["min_obstacle_clearance"]
        lat = trad["mean_lateral_offset"]
        flags["paccet_human_clearance_gt_obstacle"] = bool(
            ph is not None and po is not None and ph > po)
        flags["traditional_centered"] = bool(lat is not None and lat <= 0.15)
        flags["pass"] = (flags["paccet_human_clearance_gt_obstacle"]
                         and flags["traditional_centered"])
    elif name == "queue_join":
        dsg = pac["final_distance_to_social_goal"]
        flags["paccet_joined_queue"] = bool(
            pac["success"] and dsg is not None and dsg <= 0.5)
        flags["paccet_no_intimate_intrusion"] = pac["intimate_intrusions"] == 0
        flags["traditional_reached_desk"] = bool(
            trad["success"] and trad["final_distance_to_goal"] <= 0.5)
        flags["traditional_intruded"] = trad["proxemic_intrusions"] >= 1
        flags["pass"] = all(flags[k] for k in ("paccet_joined_queue", "paccet_no_intimate_intrusion",
                                               "traditional_reached_desk", "traditional_intruded"))
    elif name == "open_field":
        flags["pass"] = identical
    return flags


def comparison_report(logs: dict, metrics: dict, config) -> dict:
    trad, pac = metrics["traditional"].to_dict(), metrics["paccet"].to_dict()
    pos, head = trajectory_deviation(logs["traditional"], logs["paccet"])
    identical = pos == 0.0 and head == 0.0 and len(logs["traditional"].records) == len(
        logs["paccet"].records)
    deltas = {
        "human_clearance_ratio": _ratio(pac["min_human_clearance"], trad["min_human_clearance"]),
        "paccet_human_to_obstacle_ratio": _ratio(pac["min_human_clearance"],
                                                 pac["min_obstacle_clearance"]),
        "traditional_human_to_obstacle_ratio": _ratio(trad["min_human_clearance"],
                                                      trad["min_obstacle_clearance"]),
        "path_length_ratio": _ratio(pac["path_length"], trad["path_length"]),
        "proxemic_intrusion_difference": pac["proxemic_intrusions"] - trad["proxemic_intrusions"],
        "intimate_intrusion_difference": pac["intimate_intrusions"] - trad["intimate_intrusions"],
        "max_position_deviation": pos,
        "max_heading_deviation": head,
    }
    return {
        "scenario": config.name,
        "seed": logs["paccet"].seed,
        "metrics": {"traditional": trad, "paccet": pac},
        "deltas": deltas,
        "verdicts": verdicts(config.name, trad, pac, identical),
    }


# -- commands -------------------------------------------------------------------

def _model(path: Optional[str]):
    return ctx.bundled_model() if path is None else ctx.load_model(path)


def _write_run(out: Path, log, metrics, config) -> None:
    _write(out / "runlog.json", log.to_json())
    _write(out / "trajectory.csv", trajectory_csv(log, config))
    _write(out / "metrics.json", _dump(metrics.to_dict()))
    sg = reference_social_goal(config) if log.mode == "paccet" else None
    _write(out / "scene.svg", render_svg([log], config, sg))


def cmd_run(scenario, mode: str, seed: int, out, overrides=(), model_path=None) -> int:
    config = load_scenario(scenario, overrides)
    settings_for(config)
    log, metrics = run_scenario(config, mode, seed, _model(model_path) if mode == "paccet" else None)
    _write_run(Path(out), log, metrics, config)
    print(f"{config.name} [{mode}] {metrics.status} after {metrics.steps} steps")
    return EXIT_STUCK if metrics.status == STUCK else EXIT_OK


def cmd_compare(scenario, seed: int, out, overrides=(), model_path=None) -> int:
    config = load_scenario(scenario, overrides)
    settings_for(config)
    model = _model(model_path)
    out = Path(out)
    logs, metrics = {}, {}
    for mode in ("traditional", "paccet"):
        logs[mode], metrics[mode] = run_scenario(config, mode, seed, model)
        _write_run(out / mode, logs[mode], metrics[mode], config)
    report = comparison_report(logs, metrics, config)
    _write(out / "comparison.json", _dump(report))
    _write(out / "overlay.svg", render_svg([logs["traditional"], logs["paccet"]], config,
                                           reference_social_goal(config)))
    for mode in ("traditional", "paccet"):
        print(f"{config.name} [{mode}] {metrics[mode].status}")
    print("verdicts: " + ", ".join(f"{k}={v}" for k, v in report["verdicts"].items()))
    return EXIT_STUCK if any(m.status == STUCK for m in metrics.values()) else EXIT_OK


def cmd_gen_dataset(seed: int, out, n_per_label: int = 500) -> int:
    X, y = ctx.generate_dataset(n_per_label, seed)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    ctx.write_dataset(out, X, y)
    print(f"wrote {len(y)} samples to {out}")
    return EXIT_OK


def cmd_train_context(dataset, out, reg: float = 1e-6, seed: int = 0,
                      holdout: float = 0.0) -> int:
    X, y = ctx.read_dataset(dataset)
    if holdout > 0:
        Xtr, ytr, Xte, yte = ctx.split_holdout(X, y, holdout, seed)
        acc = ctx.accuracy(ctx.fit_context_model(Xtr, ytr, reg, seed), Xte, yte)
        print(f"held-out accuracy ({holdout:.0%}): {acc:.4f}")
    model = ctx.fit_context_model(X, y, reg, seed)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    ctx.save_model(model, out)
    print(f"wrote context model to {out}")
    return EXIT_OK


def paccet_demo_table(points=CONCAVE_SET) -> dict:
    pts = np.asarray(points, dtype=float)
    tie = pts.sum(axis=1)
    best, fit, knee, archive = rank_candidates(pts, tie)
    rows = []
    for i, p in enumerate(pts):
        rows.append({"point": [float(v) for v in p],
                     "normalized": [float(v) for v in archive.normalize(p)],
                     "fitness": float(fit[i]),
                     "knee_distance": float(knee[i]),
                     "on_front": bool(any(np.array_equal(p, a) for a in archive.points))})
    picks = {"paccet": best}
    for w in ((1.0, 0.0), (0.0, 1.0), (0.5, 0.5)):
        picks[f"weighted_sum_{w[0]:g}_{w[1]:g}"] = weighted_sum_select(pts, w)
    return {"candidates": rows, "selected": picks}


def cmd_paccet_demo(out=None) -> int:
    table = paccet_demo_table()
    lines = [f"{'point':>12} {'fitness':>8} {'knee':>7} front"]
    for r in table["candidates"]:
        p = "({:.1f}, {:.1f})".format(*r["point"])
        lines.append(f"{p:>12} {r['fitness']:8.3f} {r['knee_distance']:7.3f} {r['on_front']}")
    for k, i in table["selected"].items():
        lines.append("{} -> ({:.1f}, {:.1f})".format(k, *CONCAVE_SET[i]))
    print("\n".join(lines))
    if out is not None:
        _write(Path(out), _dump(table))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="socialnav", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path or bundled scenario name")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config-override", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted scenario key, JSON value; repeatable")
        p.add_argument("--model", default=None, help="context model JSON (default: bundled)")

    p = sub.add_parser("run", help="run one scenario in one mode")
    scenario_args(p)
    p.add_argument("--mode", choices=("traditional", "paccet"), default="paccet")

    scenario_args(sub.add_parser("compare", help="run both modes and compare"))

    p = sub.add_parser("gen-dataset", help="write the synthetic labeled feature CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-label", type=int, default=500)

    p = sub.add_parser("train-context", help="fit the context model from a CSV dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", type=float, default=1e-6)
    p.add_argument("--holdout", type=float, default=0.0,
                   help="also report accuracy on this held-out fraction")

    p = sub.add_parser("paccet-demo", help="concave-front selection table")
    p.add_argument("--out", default=None, help="optional JSON copy of the table")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.scenario, args.mode, args.seed, args.out,
                           args.config_override, args.model)
        if args.command == "compare":
            return cmd_compare(args.scenario, args.seed, args.out,
                               args.config_override, args.model)
        if args.command == "gen-dataset":
            return cmd_gen_dataset(args.seed, args.out, args.n_per_label)
        if args.command == "train-context":
            return cmd_train_context(args.dataset, args.out, args.reg, args.seed, args.holdout)
        return cmd_paccet_demo(args.out)
    except (ConfigError, ctx.TrainingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
