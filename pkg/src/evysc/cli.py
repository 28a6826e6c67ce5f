"""Command-line front end: run, compare, export gains.

evysc simulate --config cfg [overrides] --out DIR
evysc compare  --config cfg --compare ysc|plant [overrides] --out DIR
evysc gains    --config cfg [--speeds "5,10,20"] [--out FILE]
"""

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config, ConfigBundle
from .controller import design_feedback_gains
from .engine import run_pair, run_scenario
from .errors import ConfigError, GainSynthesisError, SimulationDivergedError
from .logio import write_log_csv
from .metrics import compare_metrics, compute_metrics, write_metrics_json
from .plots import plot_log, plot_overlay


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--maneuver", choices=("step", "sine", "dlc", "replay"))
    parser.add_argument("--speed-kph", type=float, dest="speed_kph")
    parser.add_argument("--mu", type=float)
    parser.add_argument("--ysc", choices=("on", "off"))
    parser.add_argument("--plant", choices=("single", "double"))
    parser.add_argument("--duration", type=float)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, help="measurement noise seed")


def _apply_overrides(bundle: ConfigBundle, args) -> ConfigBundle:
    scn = bundle.scenario
    updates = {}
    if args.maneuver is not None:
        updates["maneuver"] = args.maneuver
    if args.speed_kph is not None:
        updates["speed"] = args.speed_kph / 3.6
    if args.mu is not None:
        updates["mu"] = args.mu
    if args.ysc is not None:
        updates["ysc_enabled"] = args.ysc == "on"
    if args.plant is not None:
        updates["plant"] = args.plant
    if args.duration is not None:
        updates["duration"] = args.duration
    if updates:
        scn = replace(scn, **updates)
    return bundle._replace(scenario=scn).validate()


def _cmd_simulate(args) -> int:
    bundle = _apply_overrides(load_config(args.config), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = run_scenario(bundle, seed=args.seed)
    write_log_csv(log, out / "log.csv")
    write_metrics_json(compute_metrics(log), out / "metrics.json")
    plot_log(log, out / "plot.svg")
    print(f"wrote {out / 'log.csv'}, metrics.json, plot.svg ({len(log)} records)")
    if log.abort_reason:
        print(f"note: run ended early: {log.abort_reason}")
    return 0


def _cmd_compare(args) -> int:
    bundle = _apply_overrides(load_config(args.config), args)
    if args.compare == "ysc":
        labels = ("ysc_on", "ysc_off")
        pair = (replace(bundle.scenario, ysc_enabled=True),
                replace(bundle.scenario, ysc_enabled=False))
    else:
        labels = ("single", "double")
        pair = (replace(bundle.scenario, plant="single"),
                replace(bundle.scenario, plant="double"))
    bundles = tuple(bundle._replace(scenario=s).validate() for s in pair)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_a, log_b = run_pair(bundles[0], bundles[1], seed=args.seed)
    write_log_csv(log_a, out / f"log_{labels[0]}.csv")
    write_log_csv(log_b, out / f"log_{labels[1]}.csv")
    met_a, met_b = compute_metrics(log_a), compute_metrics(log_b)
    report = {labels[0]: met_a, labels[1]: met_b}
    report.update(compare_metrics(met_a, met_b))
    if len(log_a) == len(log_b):
        r_a, r_b = log_a.col("r"), log_b.col("r")
        err = math.sqrt(sum((x - y) ** 2 for x, y in zip(r_a, r_b)) / len(r_a))
        mag = math.sqrt(sum(y * y for y in r_b) / len(r_b))
        report["yaw_rate_rms_discrepancy"] = err / mag if mag > 0.0 else 0.0
    write_metrics_json(report, out / "metrics.json")
    plot_overlay(log_a, log_b, labels, out / "plot.svg")
    ratio = report["ratio"]["rms_yaw_rate_error"]
    print(f"wrote comparison to {out} (RMS yaw-error ratio "
          f"{labels[0]}/{labels[1]} = {ratio:.3f})")
    return 0


def _cmd_gains(args) -> int:
    bundle = load_config(args.config)
    speeds = None
    if args.speeds is not None:
        speeds = tuple(float(v) for v in args.speeds.replace(",", " ").split())
    schedule = design_feedback_gains(bundle.vehicle, bundle.controller,
                                     bundle.effective_mu, speeds)
    lines = ["speed_mps,k_beta,k_r,pole1_re,pole2_re"]
    for V, gain, poles in zip(schedule.speeds, schedule.gains,
                              schedule.pole_real_parts):
        lines.append(f"{V:.9g},{gain[0]:.9g},{gain[1]:.9g},{poles[0]:.9g},{poles[1]:.9g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evysc",
                                     description="EV yaw stability control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario")
    _add_common(p_sim)
    p_sim.set_defaults(fn=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="run a scenario pair")
    _add_common(p_cmp)
    p_cmp.add_argument("--compare", choices=("ysc", "plant"), default="ysc",
                       help="pair to compare: ysc on/off or single/double plant")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_gains = sub.add_parser("gains", help="export the feedback gain schedule")
    p_gains.add_argument("--config", required=True)
    p_gains.add_argument("--speeds", help="override speed grid, comma separated m/s")
    p_gains.add_argument("--out", help="output CSV path (default stdout)")
    p_gains.set_defaults(fn=_cmd_gains)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, GainSynthesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
