"""Command-line pipeline driver.

Subcommands mirror the pipeline stages so each one can run (and re-run)
from the previous stage's persisted output:

    synth      generate a deterministic synthetic trace from a JSON spec
    ingest     parse and validate trace files
    normalize  fold traces into per-visit normalized-set state series
    predict    annotate state series with predicted update times
    package    replay packaging decisions, emit manifests and mappings
    simulate   run baseline and package clients, write the report
    report     print the per-interval summary of an existing report

Exit codes: 0 success, 2 bad usage or config, 3 invalid trace or state,
4 cadence mismatch, 5 missing upstream artifact, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import metrics
from .config import ConfigError, PipelineConfig, load_config
from .engine import analyze_trace, build_package_history
from .normalize import NormalizedSet, parse_state, serialize_state
from .package import Decision
from .simulate import CadenceError
from .trace import (
    SynthResource,
    SynthSpec,
    TraceError,
    VisitTrace,
    parse_trace,
    serialize_trace,
    synthesize_trace,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRACE = 3
EXIT_CADENCE = 4
EXIT_MISSING = 5

STATES_HEADER_PREFIX = "#rewap-states v1"


def _fail(message: str, code: int) -> int:
    print(f"rewap: error: {message}", file=sys.stderr)
    return code


def _load_traces(cfg: PipelineConfig) -> list[VisitTrace]:
    traces = []
    for path in cfg.traces:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"trace file not found: {p}")
        traces.append(parse_trace(p.read_bytes()))
    if not traces:
        raise ConfigError("config lists no traces")
    return traces


# --- state series (stage hand-off files) -------------------------------------

def write_state_series(
    path: Path, trace: VisitTrace, states: Sequence[NormalizedSet]
) -> None:
    header = (
        f"{STATES_HEADER_PREFIX} app={trace.app_id} "
        f"interval={trace.visit_interval_s} start={trace.snapshots[0].visit_time_s}\n"
    )
    blocks = [serialize_state(s).decode("utf-8") for s in states]
    path.write_text(header + "".join(blocks), encoding="utf-8")


def read_state_series(path: Path) -> tuple[str, int, int, list[NormalizedSet]]:
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(STATES_HEADER_PREFIX):
        raise ValueError(f"{path}: missing series header")
    fields = dict(part.split("=", 1) for part in lines[0].split()[2:])
    app_id, interval, start = fields["app"], int(fields["interval"]), int(fields["start"])
    blocks: list[list[str]] = []
    for line in lines[1:]:
        if line.startswith("#rewap-state v1"):
            blocks.append([line])
        elif line.strip():
            if not blocks:
                raise ValueError(f"{path}: record before first state header")
            blocks[-1].append(line)
    states = [parse_state("\n".join(block)) for block in blocks]
    return app_id, interval, start, states


# --- subcommands --------------------------------------------------------------

def cmd_synth(args: argparse.Namespace) -> int:
    spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    resources = tuple(SynthResource(**r) for r in spec_data.pop("resources"))
    spec = SynthSpec(resources=resources, **spec_data)
    trace = synthesize_trace(spec, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_trace(trace))
    print(f"wrote {out} ({len(trace.snapshots)} snapshots)")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    for path in args.traces:
        trace = parse_trace(Path(path).read_bytes())
        total = sum(len(s.resources) for s in trace.snapshots)
        print(
            f"ok app={trace.app_id} interval={trace.visit_interval_s}s "
            f"snapshots={len(trace.snapshots)} resources={total}"
        )
    return EXIT_OK


def _stage_dir(cfg: PipelineConfig, stage: str) -> Path:
    d = Path(cfg.output_dir) / stage
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_normalize(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    out_dir = _stage_dir(cfg, "normalize")
    for trace in _load_traces(cfg):
        analyses = analyze_trace(trace, cfg.predictor)
        # Prediction annotations ride along but the normalize contract is the
        # per-visit set; predict rewrites them from its own config.
        write_state_series(out_dir / f"{trace.app_id}.states", trace, [a.state for a in analyses])
        print(f"normalized {trace.app_id}: {len(analyses)} visits")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    from .predict import annotate_predictions

    in_dir = Path(cfg.output_dir) / "normalize"
    if not in_dir.is_dir():
        raise FileNotFoundError(f"missing normalize output {in_dir}; run 'normalize' first")
    out_dir = _stage_dir(cfg, "predict")
    for series in sorted(in_dir.glob("*.states")):
        app_id, interval, start, states = read_state_series(series)
        annotated = [annotate_predictions(s, interval, cfg.predictor) for s in states]
        header = f"{STATES_HEADER_PREFIX} app={app_id} interval={interval} start={start}\n"
        blocks = [serialize_state(s).decode("utf-8") for s in annotated]
        (out_dir / series.name).write_text(header + "".join(blocks), encoding="utf-8")
        print(f"predicted {app_id}: {len(annotated)} visits")
    return EXIT_OK


def cmd_package(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    from .engine import VisitAnalysis
    from .predict import prune

    in_dir = Path(cfg.output_dir) / "predict"
    if not in_dir.is_dir():
        raise FileNotFoundError(f"missing predict output {in_dir}; run 'predict' first")
    sigma = cfg.packaging_distribution()
    for series in sorted(in_dir.glob("*.states")):
        app_id, interval, start, states = read_state_series(series)
        analyses = [
            VisitAnalysis(
                index=i,
                visit_time_s=start + i * interval,
                state=s,
                candidates=prune(s),
            )
            for i, s in enumerate(states)
        ]
        history = build_package_history(
            analyses, sigma, cfg.policy, cfg.cache.heuristic_duration_s
        )
        app_dir = _stage_dir(cfg, "package") / app_id
        app_dir.mkdir(parents=True, exist_ok=True)
        log_lines = []
        for visit in history:
            if visit.decision is not Decision.KEPT:
                version = visit.package.version
                (app_dir / f"manifest_v{version}.appcache").write_bytes(visit.manifest)
                (app_dir / f"mapping_v{version}.txt").write_bytes(visit.mapping_bytes)
            log_lines.append(
                f"{visit.visit_time_s} {visit.decision.value} v{visit.package.version} "
                f"benefit={visit.package.benefit_bytes:.1f} members={len(visit.package.members)}"
            )
        (app_dir / "packages.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
        print(f"packaged {app_id}: {len(package_versions(history))} versions")
    return EXIT_OK


def package_versions(history) -> list[int]:
    return [v.package.version for v in history if v.decision is not Decision.KEPT]


def cmd_simulate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    out_dir = _stage_dir(cfg, "simulate")
    all_results = []
    for trace in _load_traces(cfg):
        results, ledgers = metrics.evaluate_trace(
            trace, cfg.revisit_intervals_s, cfg.cache, cfg.predictor, cfg.policy
        )
        all_results.extend(results)
        if args.dump_ledgers:
            ledger_dir = out_dir / "ledgers"
            ledger_dir.mkdir(parents=True, exist_ok=True)
            for interval, (baseline, rewap) in ledgers.items():
                (ledger_dir / f"{trace.app_id}_{interval}_baseline.txt").write_bytes(
                    metrics.render_ledger(baseline)
                )
                (ledger_dir / f"{trace.app_id}_{interval}_rewap.txt").write_bytes(
                    metrics.render_ledger(rewap)
                )
    report = metrics.render_report(all_results, cfg.echo())
    (out_dir / "report.txt").write_bytes(report)
    print(f"wrote {out_dir / 'report.txt'} ({len(all_results)} rows)")
    return EXIT_OK


def cmd_report(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    report_path = Path(cfg.output_dir) / "simulate" / "report.txt"
    if not report_path.exists():
        raise FileNotFoundError(f"missing report {report_path}; run 'simulate' first")
    for line in report_path.read_text(encoding="utf-8").splitlines():
        if line.startswith("S "):
            _, interval, lo, q1, med, q3, hi = line.split(" ")
            print(
                f"interval {int(interval):>6}s  saved fraction "
                f"min={lo} q1={q1} median={med} q3={q3} max={hi}"
            )
        elif line.startswith("# config"):
            print(line[2:])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rewap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic trace")
    p_synth.add_argument("--spec", required=True, help="JSON generator spec")
    p_synth.add_argument("--out", required=True, help="output trace path")
    p_synth.add_argument("--seed", type=int, default=0)

    p_ingest = sub.add_parser("ingest", help="validate trace files")
    p_ingest.add_argument("traces", nargs="+")

    for name in ("normalize", "predict", "package", "simulate", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--output-dir", default=None, help="override the configured output dir")
        if name == "simulate":
            p.add_argument("--dump-ledgers", action="store_true")
    return parser


_CONFIG_COMMANDS = {
    "normalize": cmd_normalize,
    "predict": cmd_predict,
    "package": cmd_package,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "ingest":
            return cmd_ingest(args)
        cfg = load_config(args.config, args.output_dir)
        return _CONFIG_COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except (TraceError, ValueError) as exc:
        if isinstance(exc, CadenceError):
            return _fail(str(exc), EXIT_CADENCE)
        return _fail(str(exc), EXIT_TRACE)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_MISSING)
    except OSError as exc:
        return _fail(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
