"""Command line interface.

Subcommands::

    orbit         print an exact orbit table
    metric-check  metric axioms, non-expansion and isometry defects
    scan          ball-measure scan across radii (measure compatibility)
    sensitivity   per-center separation fractions and trapped measures
    pairwise      pairwise separation and the mode-equivalence check
    classify      the two-sided sensitive / isometry-like verdict

Every run writes a JSON-lines report and a flat CSV next to it (paths
configurable with --json/--csv).  Options resolve in a fixed order: command
line flag, then config file entry, then the SENSILAB_SEED environment
variable (for the seed only), then the built-in default.  Config files hold
``key = value`` lines with ``#`` comments; keys match the long flag names
with dashes replaced by underscores.

Exit codes: 0 on success, 2 for argument or config errors, 3 when a requested
horizon exhausts the precision of the points involved.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import backends, classify, metrics, reports, sensitivity, systems
from .errors import PrecisionExhaustedError, SensilabError
from .metrics import MetricSpec
from .streams import Substream
from .systems import ExactPoint

ENV_SEED = "SENSILAB_SEED"


def _parse_grid(text: str) -> tuple[float, ...]:
    """Comma list ``0.1,0.2`` or inclusive range ``0.1:0.9:0.1``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range needs start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        out = []
        k = 0
        while True:
            v = round(start + k * step, 12)
            if v > stop + step * 1e-9:
                break
            out.append(v)
            k += 1
        if not out:
            raise ValueError(f"empty grid: {text!r}")
        return tuple(out)
    return tuple(float(p) for p in text.split(","))


def _parse_point(text: str) -> str:
    # validated later against the map's precision needs; keep the raw text
    return text.strip()


def _point_from_text(text: str, bits: int) -> ExactPoint:
    if text.startswith("0x"):
        return ExactPoint.parse(text)
    if "/" in text:
        num, den = text.split("/", 1)
        return ExactPoint.from_fraction(int(num), int(den), bits)
    return ExactPoint.from_float(float(text), bits)


_CONVERTERS = {
    "map": str,
    "metric": str,
    "point": _parse_point,
    "bits": int,
    "horizon": int,
    "seed": int,
    "delta": float,
    "delta_grid": _parse_grid,
    "radii": _parse_grid,
    "radius": float,
    "threshold": float,
    "centers": int,
    "partners": int,
    "pairs": int,
    "samples": int,
    "trials": int,
    "budget": int,
    "workers": int,
    "json": str,
    "csv": str,
}

# echoed into every record; workers is wall-time only and stays out
_NO_ECHO = ("workers", "config")


def _parse_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(
                        f"{path}:{lineno}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                entries[key.replace("-", "_")] = value
    except OSError as exc:
        raise ValueError(f"cannot read config file: {exc}") from None
    return entries


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    cfg = dict(defaults)
    file_cfg = _parse_config_file(args.config) if args.config else {}
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key, raw in file_cfg.items():
        cfg[key] = _CONVERTERS[key](raw)
    for key in defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
    if cfg.get("seed") is None:
        env = os.environ.get(ENV_SEED)
        cfg["seed"] = int(env) if env else 0
    return cfg


def _echo(command: str, cfg: dict) -> dict:
    out = {"command": command}
    for key, value in cfg.items():
        if key in _NO_ECHO:
            continue
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def _write_outputs(cfg: dict, records: list[dict], rows: list[dict]) -> None:
    reports.write_text(cfg["json"], reports.render_jsonl(records))
    reports.write_text(cfg["csv"], reports.render_csv(rows))
    print(f"wrote {cfg['json']} and {cfg['csv']}")


def _profile_rows(echo_row: dict, rep: sensitivity.SensitivityReport) -> list[dict]:
    rows = []
    for mark, fraction in rep.horizon_profile:
        rows.append(reports.csv_row(map=rep.map, metric=rep.metric, N=mark,
                                    delta=rep.delta, center="[profile]",
                                    fraction=fraction,
                                    samples=rep.pairs_sampled,
                                    seed=echo_row["seed"]))
    return rows


# ---------------------------------------------------------------- commands

def _cmd_orbit(cfg: dict) -> int:
    spec = systems.parse_map(cfg["map"])
    horizon = cfg["horizon"]
    bits = cfg["bits"] or systems.required_bits(spec, horizon)
    if cfg["point"] is not None:
        x = _point_from_text(cfg["point"], bits)
    else:
        x = systems.sample_point(Substream(cfg["seed"], (0,)), bits)
    orb = systems.orbit(spec, x, horizon)
    print(f"# {spec.description}  ({spec})")
    for n, p in enumerate(orb.points):
        print(f"{n:6d}  {p.hex():<40}  {p.to_float():.17g}")
    echo = _echo("orbit", cfg)
    record = reports.make_record("orbit", echo, "orbit", {
        "map": str(spec), "horizon": horizon,
        "points": [p.hex() for p in orb.points]})
    rows = [reports.csv_row(map=str(spec), N=n, center=p.hex(),
                            fraction=p.to_float(), seed=cfg["seed"])
            for n, p in enumerate(orb.points)]
    _write_outputs(cfg, [record], rows)
    return 0


def _cmd_metric_check(cfg: dict) -> int:
    metric = metrics.parse_metric(cfg["metric"])
    spec = systems.parse_map(cfg["map"])
    rng = Substream(cfg["seed"])
    workers = cfg["workers"]
    axioms = metrics.verify_metric_axioms(metric, rng.child(0),
                                          trials=cfg["trials"],
                                          workers=workers)
    lip = metrics.lipschitz_defect(metric, spec, rng.child(1),
                                   pairs=cfg["pairs"], workers=workers)
    iso = metrics.isometry_defect(metric, spec, rng.child(2),
                                  pairs=cfg["pairs"], workers=workers)
    print(f"axioms: {'ok' if axioms.ok else 'VIOLATED'} "
          f"({len(axioms.violations)} violations in {axioms.trials} trials)")
    print(f"non-expansion defect vs {spec}: {lip.max_defect:.6g} "
          f"({lip.comparison})")
    print(f"isometry defect vs {spec}: {iso.max_defect:.6g}")
    echo = _echo("metric-check", cfg)
    records = [reports.make_record("metric-check", echo, "axioms",
                                   axioms.to_record()),
               reports.make_record("metric-check", echo, "lipschitz",
                                   lip.to_record()),
               reports.make_record("metric-check", echo, "isometry",
                                   iso.to_record())]
    horizon = metric.horizon if metric.kind == "derived" else ""
    rows = [reports.csv_row(map=str(spec), metric=str(metric), N=horizon,
                            center="[axioms]",
                            fraction=float(len(axioms.violations)),
                            samples=axioms.trials, seed=cfg["seed"]),
            reports.csv_row(map=str(spec), metric=str(metric), N=horizon,
                            center="[lipschitz]", fraction=lip.max_defect,
                            samples=lip.pairs, seed=cfg["seed"]),
            reports.csv_row(map=str(spec), metric=str(metric), N=horizon,
                            center="[isometry]", fraction=iso.max_defect,
                            samples=iso.pairs, seed=cfg["seed"])]
    _write_outputs(cfg, records, rows)
    return 0


def _cmd_scan(cfg: dict) -> int:
    metric = metrics.parse_metric(cfg["metric"])
    rng = Substream(cfg["seed"])
    rep = metrics.mu_compatibility_scan(metric, cfg["radii"], rng,
                                        centers=cfg["centers"],
                                        samples=cfg["samples"],
                                        workers=cfg["workers"])
    print(f"verdict: {rep.verdict}")
    print(f"smallest ball: {rep.min_ball.estimate.value:.6g} at "
          f"center {rep.min_ball.center} radius {rep.min_ball.radius}")
    for ball in rep.flagged:
        print(f"flagged: center {ball.center} radius {ball.radius} "
              f"measure {ball.estimate.value:.6g} "
              f"(+/- {ball.estimate.half_width:.6g})")
    echo = _echo("scan", cfg)
    records = [reports.make_record("scan", echo, "scan", rep.to_record())]
    horizon = metric.horizon if metric.kind == "derived" else ""
    rows = [reports.csv_row(map=str(metric.map) if metric.map else "",
                            metric=str(metric), N=horizon, delta=b.radius,
                            center=b.center, fraction=b.estimate.value,
                            half_width=b.estimate.half_width,
                            samples=b.estimate.samples, seed=cfg["seed"])
            for b in rep.balls]
    _write_outputs(cfg, records, rows)
    return 0


def _require(cfg: dict, key: str) -> None:
    if cfg[key] is None:
        raise ValueError(f"{key.replace('_', '-')} is required "
                         "(flag or config file)")


def _cmd_sensitivity(cfg: dict) -> int:
    _require(cfg, "delta")
    spec = systems.parse_map(cfg["map"])
    metric = metrics.parse_metric(cfg["metric"])
    rng = Substream(cfg["seed"])
    rep = sensitivity.w_sensitivity_estimate(
        spec, metric, cfg["delta"], rng.child(0), centers=cfg["centers"],
        partners=cfg["partners"], horizon=cfg["horizon"],
        workers=cfg["workers"])
    bits = systems.required_bits(spec, cfg["horizon"])
    trapped_pts = metrics.adversarial_centers(bits)[:2]
    trapped = [(p, sensitivity.trapped_set_measure(
        spec, metric, p, cfg["delta"], cfg["horizon"], rng.child(1, i),
        samples=cfg["samples"], workers=cfg["workers"]))
        for i, p in enumerate(trapped_pts)]
    print(f"separation fraction: {rep.separation_fraction:.6g} "
          f"(+/- {rep.half_width:.6g}) at delta={rep.delta} N={rep.horizon}")
    for p, est in trapped:
        tag = "null" if est.statistically_null else "POSITIVE"
        print(f"trapped at {p.hex()}: {est.value:.6g} "
              f"(+/- {est.half_width:.6g}) -> statistically {tag}")
    echo = _echo("sensitivity", cfg)
    records = [reports.make_record("sensitivity", echo, "w-sensitivity",
                                   rep.to_record())]
    for p, est in trapped:
        records.append(reports.make_record(
            "sensitivity", echo, "trapped",
            {"map": str(spec), "metric": str(metric), "delta": cfg["delta"],
             "horizon": cfg["horizon"], "center": p.hex(),
             "estimate": est.to_record()}))
    rows = [reports.csv_row(map=rep.map, metric=rep.metric, N=rep.horizon,
                            delta=rep.delta, center=c.center,
                            fraction=c.fraction, samples=c.partners,
                            seed=cfg["seed"])
            for c in rep.per_center]
    rows.append(reports.csv_row(map=rep.map, metric=rep.metric, N=rep.horizon,
                                delta=rep.delta, center="[pooled]",
                                fraction=rep.separation_fraction,
                                half_width=rep.half_width,
                                samples=rep.pairs_sampled, seed=cfg["seed"]))
    rows.extend(_profile_rows({"seed": cfg["seed"]}, rep))
    _write_outputs(cfg, records, rows)
    return 0


def _cmd_pairwise(cfg: dict) -> int:
    _require(cfg, "delta")
    spec = systems.parse_map(cfg["map"])
    metric = metrics.parse_metric(cfg["metric"])
    rng = Substream(cfg["seed"])
    rep = sensitivity.pairwise_sensitivity_estimate(
        spec, metric, cfg["delta"], rng.child(0), pairs=cfg["pairs"],
        horizon=cfg["horizon"], workers=cfg["workers"])
    eq = sensitivity.equivalence_check(
        spec, metric, cfg["delta"], rng.child(1), budget=cfg["budget"],
        horizon=cfg["horizon"], workers=cfg["workers"])
    print(f"pairwise fraction: {rep.separation_fraction:.6g} "
          f"(+/- {rep.half_width:.6g}) at delta={rep.delta} N={rep.horizon}")
    print(f"mode gap: {eq.gap:.6g} vs tolerance {eq.tolerance:.6g} "
          f"({'ok' if eq.within_tolerance else 'EXCEEDED'})")
    echo = _echo("pairwise", cfg)
    records = [reports.make_record("pairwise", echo, "pairwise",
                                   rep.to_record()),
               reports.make_record("pairwise", echo, "equivalence",
                                   eq.to_record())]
    rows = [reports.csv_row(map=rep.map, metric=rep.metric, N=rep.horizon,
                            delta=rep.delta, center="[pairwise]",
                            fraction=rep.separation_fraction,
                            half_width=rep.half_width,
                            samples=rep.pairs_sampled, seed=cfg["seed"])]
    rows.extend(_profile_rows({"seed": cfg["seed"]}, rep))
    _write_outputs(cfg, records, rows)
    return 0


def _cmd_classify(cfg: dict) -> int:
    spec = systems.parse_map(cfg["map"])
    metric = metrics.parse_metric(cfg["metric"])
    config = classify.DichotomyConfig(
        delta_grid=cfg["delta_grid"], horizon=cfg["horizon"],
        threshold=cfg["threshold"], workers=cfg["workers"])
    verdict = classify.dichotomy_classify(spec, metric,
                                          Substream(cfg["seed"]), config)
    print(f"verdict: {verdict.label}")
    if verdict.delta is not None:
        print(f"sensitivity constant: {verdict.delta}")
    if verdict.isometry_defect is not None:
        print(f"isometry defect: {verdict.isometry_defect:.6g}")
    if verdict.ball_uniformity_spread is not None:
        print(f"ball uniformity spread: {verdict.ball_uniformity_spread:.6g}")
    for w in verdict.warnings:
        print(f"warning: {w}")
    echo = _echo("classify", cfg)
    records = [reports.make_record("classify", echo, "verdict",
                                   verdict.to_record())]
    rows = []
    for row in verdict.evidence["search"]["rows"]:
        rows.append(reports.csv_row(
            map=verdict.map, metric=verdict.metric, N=cfg["horizon"],
            delta=row["delta"], center="[search]", fraction=row["fraction"],
            half_width=row["half_width"],
            samples=verdict.evidence["search"]["pairs_per_delta"],
            seed=cfg["seed"]))
    _write_outputs(cfg, records, rows)
    return 0


# ------------------------------------------------------------------ parser

def _add_common(sub: argparse.ArgumentParser, command: str) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--seed", type=int,
                     help=f"stream seed (default ${ENV_SEED} or 0)")
    sub.add_argument("--workers", type=int,
                     help="worker threads (wall time only; outputs "
                          "never depend on this)")
    sub.add_argument("--json", help="JSON-lines report path")
    sub.add_argument("--csv", help="CSV report path")
    sub.set_defaults(
        json_default=f"{command}-report.jsonl",
        csv_default=f"{command}-report.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensilab",
        description="Measure sensitivity and isometry behavior of "
                    "measure-preserving interval maps.")
    parser.add_argument("--backend", action="store_true",
                        help="print the selected kernel backend and exit")
    subs = parser.add_subparsers(dest="command")

    p = subs.add_parser("orbit", help="print an exact orbit table")
    p.add_argument("--map", help="map text, e.g. radic:2 or tent")
    p.add_argument("--point", type=_parse_point,
                   help="start point: 0x<hex>@<bits>, p/q, or a float")
    p.add_argument("--bits", type=int, help="point width in bits")
    p.add_argument("--horizon", "-N", type=int, help="orbit depth")
    _add_common(p, "orbit")
    p.set_defaults(handler=_cmd_orbit, defaults={
        "map": "radic:2", "point": None, "bits": None, "horizon": 16,
        "seed": None, "workers": 1, "json": None, "csv": None})

    p = subs.add_parser("metric-check",
                        help="axioms, non-expansion and isometry defects")
    p.add_argument("--metric", help="metric text, e.g. circle or "
                                    "derived(euclidean; radic:2; N=50)")
    p.add_argument("--map", help="map to test defects against "
                                 "(default: the metric's own, or identity)")
    p.add_argument("--trials", type=int, help="sampled triples for axioms")
    p.add_argument("--pairs", type=int, help="sampled pairs for defects")
    _add_common(p, "metric-check")
    p.set_defaults(handler=_cmd_metric_check, defaults={
        "metric": "euclidean", "map": None, "trials": 1000, "pairs": 1000,
        "seed": None, "workers": 1, "json": None, "csv": None})

    p = subs.add_parser("scan",
                        help="ball-measure scan across radii and centers")
    p.add_argument("--metric", help="metric text")
    p.add_argument("--radii", type=_parse_grid,
                   help="radius grid: 0.1,0.5 or 0.1:0.9:0.2")
    p.add_argument("--centers", type=int, help="sampled centers")
    p.add_argument("--samples", type=int, help="Monte Carlo samples per ball")
    _add_common(p, "scan")
    p.set_defaults(handler=_cmd_scan, defaults={
        "metric": "euclidean", "radii": (0.1, 0.5, 0.9), "centers": 8,
        "samples": 4000, "seed": None, "workers": 1, "json": None,
        "csv": None})

    p = subs.add_parser("sensitivity",
                        help="per-center separation and trapped measures")
    p.add_argument("--map", help="map text")
    p.add_argument("--metric", help="base metric text")
    p.add_argument("--delta", type=float, help="separation level (required)")
    p.add_argument("--horizon", "-N", type=int, help="orbit horizon")
    p.add_argument("--centers", type=int, help="sampled start points")
    p.add_argument("--partners", type=int, help="partners per start point")
    p.add_argument("--samples", type=int,
                   help="samples for the trapped-set measures")
    _add_common(p, "sensitivity")
    p.set_defaults(handler=_cmd_sensitivity, defaults={
        "map": "radic:2", "metric": "euclidean", "delta": None,
        "horizon": 200, "centers": 20, "partners": 500, "samples": 10000,
        "seed": None, "workers": 1, "json": None, "csv": None})

    p = subs.add_parser("pairwise",
                        help="pairwise separation and mode equivalence")
    p.add_argument("--map", help="map text")
    p.add_argument("--metric", help="base metric text")
    p.add_argument("--delta", type=float, help="separation level (required)")
    p.add_argument("--horizon", "-N", type=int, help="orbit horizon")
    p.add_argument("--pairs", type=int, help="sampled pairs")
    p.add_argument("--budget", type=int,
                   help="orbit pairs per mode in the equivalence check")
    _add_common(p, "pairwise")
    p.set_defaults(handler=_cmd_pairwise, defaults={
        "map": "radic:2", "metric": "euclidean", "delta": None,
        "horizon": 200, "pairs": 10000, "budget": 10000, "seed": None,
        "workers": 1, "json": None, "csv": None})

    p = subs.add_parser("classify",
                        help="sensitive / isometry-like / inconclusive")
    p.add_argument("--map", help="map text")
    p.add_argument("--metric", help="base metric text")
    p.add_argument("--delta-grid", dest="delta_grid", type=_parse_grid,
                   help="delta grid for the constant search")
    p.add_argument("--horizon", "-N", type=int, help="orbit horizon")
    p.add_argument("--threshold", type=float,
                   help="separation fraction a delta must reach")
    _add_common(p, "classify")
    p.set_defaults(handler=_cmd_classify, defaults={
        "map": "radic:2", "metric": "euclidean",
        "delta_grid": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
        "horizon": 200, "threshold": 0.99, "seed": None, "workers": 1,
        "json": None, "csv": None})

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "backend", False) and args.command is None:
        print(backends.BACKEND)
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        cfg = _resolve(args, args.defaults)
        if cfg["json"] is None:
            cfg["json"] = args.json_default
        if cfg["csv"] is None:
            cfg["csv"] = args.csv_default
        if args.command == "metric-check" and cfg["map"] is None:
            metric = metrics.parse_metric(cfg["metric"])
            cfg["map"] = (str(metric.map) if metric.kind == "derived"
                          else "identity")
        return args.handler(cfg)
    except PrecisionExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SensilabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
