#!/usr/bin/env python3
"""
Command-line entry points for the time-bin switch simulator.

    python run_timebin.py hom-scan    [--delays -240:240:20] [--ideal] [--out hom_scan.csv]
    python run_timebin.py fringe-scan [--david-phase pi/2] [--phases ...]
    python run_timebin.py delay-scan  [--charlie-phase pi|2pi]
    python run_timebin.py cz-check    [--out cz_report.json]
    python run_timebin.py replay      hom_scan.manifest.json

Every command writes its outputs plus a JSON run manifest and prints a short
summary. Exit codes: 0 success, 2 configuration error, 3 runtime invariant
violation, 4 gate contract failure.
"""

import argparse
import csv
import json
import logging
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

try:
    from .config import (
        CONFIG_ENV_VAR, TIMEBIN_VERSION, CompensationStyle, ConfigError, GateContractViolation,
        TimebinConfig, TimebinError, config_from_dict, load_config,
    )
    from .experiments import (
        ExperimentConfig, ScanResult, analyze_fringe, delay_contrast, delay_scan, fringe_scan,
        hom_dip_visibility, hom_scan,
    )
    from .gates import cz_gate_report
except ImportError:
    from config import (
        CONFIG_ENV_VAR, TIMEBIN_VERSION, CompensationStyle, ConfigError, GateContractViolation,
        TimebinConfig, TimebinError, config_from_dict, load_config,
    )
    from experiments import (
        ExperimentConfig, ScanResult, analyze_fringe, delay_contrast, delay_scan, fringe_scan,
        hom_dip_visibility, hom_scan,
    )
    from gates import cz_gate_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_GATE = 4

HOM_HEADER = ["delay_ps", "coincidences", "singles_c", "singles_d", "rate", "rate_stderr"]
FRINGE_HEADER = ["phi_c", "coincidences", "accidentals", "subtracted", "singles_c"]
DELAY_HEADER = HOM_HEADER

DEFAULT_HOM_DELAYS = "-240:240:20"
DEFAULT_DELAY_SCAN = "-240:240:40"
DEFAULT_FRINGE_POINTS = 12

_PHASE_RE = re.compile(r"^([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?$")


# =============================================================================
# ARGUMENT PARSING
# =============================================================================

def parse_phase(text: str) -> float:
    """Radians from '1.57', 'pi', '2pi', 'pi/2', '-3pi/4' ..."""
    cleaned = text.strip().lower().replace("π", "pi")
    match = _PHASE_RE.match(cleaned)
    if match:
        factor, divisor = match.groups()
        if factor in ("", "+"):
            factor = "1"
        elif factor == "-":
            factor = "-1"
        return float(factor) * math.pi / (float(divisor) if divisor else 1.0)
    try:
        return float(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a phase: {text!r}") from None


def parse_values(text: str, item: Callable[[str], float] = float) -> List[float]:
    """Comma list ('0,20,40') or inclusive range ('start:stop:step')"""
    text = text.strip()
    try:
        if ":" in text and "," not in text:
            start, stop, step = (item(part) for part in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError(text)
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + k * step for k in range(count)]
        return [item(part) for part in text.split(",") if part.strip()]
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"not a value list: {text!r}") from None


def _phase_list(text: str) -> List[float]:
    return parse_values(text, parse_phase)


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


# =============================================================================
# OUTPUTS
# =============================================================================

def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]],
              metadata: Dict[str, Any]) -> None:
    """`#` metadata lines, a header row, '.' decimals and '\\n' newlines"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        for key, value in metadata.items():
            f.write(f"# {key}: {value}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])


@dataclass
class RunManifest:
    command: str
    argv: List[str]
    config: Dict[str, Any]
    seed: int
    version: str = TIMEBIN_VERSION
    outputs: List[str] = field(default_factory=list)
    duration_s: float = 0.0

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2)

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        try:
            with open(path, encoding="utf-8") as f:
                return cls(**json.load(f))
        except (OSError, ValueError, TypeError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def _metadata(command: str, result: ScanResult) -> Dict[str, Any]:
    meta = {"tool": "timebin", "version": TIMEBIN_VERSION, "command": command}
    meta.update({k: result.metadata[k] for k in ("config_hash", "seed", "workers", "pulses", "ideal")})
    return meta


def _finish(args: argparse.Namespace, settings: TimebinConfig, outputs: List[Path], started: float) -> None:
    manifest = RunManifest(
        command=args.command,
        argv=list(getattr(args, "argv", [])),
        config=settings.to_dict(),
        seed=args.seed if args.seed is not None else settings.run.seed,
        outputs=[str(p) for p in outputs],
        duration_s=round(time.perf_counter() - started, 3),
    )
    target = manifest_path(outputs[0])
    manifest.write(target)
    print(f"Manifest: {target}")


# =============================================================================
# COMMANDS
# =============================================================================

def _settings(args: argparse.Namespace) -> TimebinConfig:
    settings = getattr(args, "settings", None)
    return settings if settings is not None else load_config(args.config)


def _experiment(args: argparse.Namespace, settings: TimebinConfig) -> ExperimentConfig:
    overrides: Dict[str, Any] = {}
    if args.pulses is not None:
        if args.pulses < 1:
            raise ConfigError(f"--pulses must be >= 1, got {args.pulses}")
        overrides["pulses"] = args.pulses
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        overrides["workers"] = args.workers
    if args.ideal:
        overrides["ideal"] = True
    return ExperimentConfig.from_settings(settings, **overrides)


def _require_increasing(option: str, values: Sequence[float]) -> None:
    """Scan settings must be strictly increasing"""
    for before, after in zip(values, values[1:]):
        if not after > before:
            raise ConfigError(f"{option} must be strictly increasing, got {_format(before)} then {_format(after)}")


def _scan_rows(result: ScanResult) -> List[List[Any]]:
    return [[p.setting, p.record.coincidences, p.record.singles_c, p.record.singles_d, p.rate, p.rate_stderr]
            for p in result.points]


def _cmd_hom_scan(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    settings = _settings(args)
    config = _experiment(args, settings)
    if not args.delays:
        raise ConfigError("--delays must name at least one delay")
    _require_increasing("--delays", args.delays)
    fwhm = config.source.pulse_fwhm_ps

    print(f"HOM scan: {len(args.delays)} delays, {config.pulses} pulses/point, seed {config.seed}")
    result = hom_scan(args.delays, config, sampled=True)
    out = Path(args.out)
    write_csv(out, HOM_HEADER, _scan_rows(result), _metadata("hom-scan", result))

    analytic, _ = hom_dip_visibility(result, fwhm, sampled=False)
    print(f"Dip visibility (analytic): {analytic:.4f}")
    try:
        sampled, err = hom_dip_visibility(result, fwhm, sampled=True)
        print(f"Dip visibility (sampled):  {sampled:.4f} ± {err:.4f}")
    except TimebinError as exc:
        print(f"Dip visibility (sampled):  unavailable ({exc})")
    print(f"CSV: {out}")
    _finish(args, settings, [out], started)
    return EXIT_OK


def _print_fringe(label: str, summary) -> None:
    for name, fit, witness in (("raw", summary.raw, summary.raw_witness),
                               ("subtracted", summary.subtracted, summary.subtracted_witness)):
        verdict = "entangled" if witness else "not certified"
        print(f"  {label} {name:<10} V = {fit.visibility:.4f} ± {fit.visibility_stderr:.4f}  "
              f"(witness V > 1/3: {verdict})")


def _cmd_fringe_scan(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    settings = _settings(args)
    config = _experiment(args, settings)
    phases = args.phases or [2.0 * math.pi * k / DEFAULT_FRINGE_POINTS for k in range(DEFAULT_FRINGE_POINTS)]
    if len(phases) < 5:
        raise ConfigError(f"--phases needs at least 5 values, got {len(phases)}")
    _require_increasing("--phases", phases)

    print(f"Fringe scan: phi_D = {args.david_phase:.4f}, {len(phases)} phases, {config.pulses} pulses/point")
    result = fringe_scan(phases, args.david_phase, config, sampled=True)
    out = Path(args.out)
    rows = [[p.setting, p.record.coincidences, p.record.accidentals_estimate,
             max(0.0, p.record.coincidences - p.record.accidentals_estimate), p.record.singles_c]
            for p in result.points]
    write_csv(out, FRINGE_HEADER, rows, _metadata("fringe-scan", result))

    _print_fringe("analytic", analyze_fringe(result, sampled=False))
    try:
        summary = analyze_fringe(result, sampled=True)
        _print_fringe("sampled ", summary)
        print(f"  singles flatness: max deviation {summary.singles_flatness:.2f} sigma")
    except TimebinError as exc:
        print(f"  sampled fit unavailable ({exc})")
    print(f"CSV: {out}")
    _finish(args, settings, [out], started)
    return EXIT_OK


def _cmd_delay_scan(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    settings = _settings(args)
    config = _experiment(args, settings)
    fwhm = config.source.pulse_fwhm_ps
    _require_increasing("--delays", args.delays)
    traces = [args.charlie_phase] if args.charlie_phase is not None else [math.pi, 2.0 * math.pi]
    base = Path(args.out)

    outputs = []
    for phase in traces:
        turns = phase / math.pi
        label = "pi" if abs(turns - 1.0) < 1e-12 else f"{turns:g}pi"
        out = base if len(traces) == 1 else base.with_name(f"{base.stem}_{label}{base.suffix}")
        print(f"Delay scan: phi_C = {label}, {len(args.delays)} delays, {config.pulses} pulses/point")
        result = delay_scan(args.delays, phase, config, david_phase=0.0, sampled=True)
        write_csv(out, DELAY_HEADER, _scan_rows(result), _metadata("delay-scan", result))
        analytic, _ = delay_contrast(result, fwhm, sampled=False)
        kind = "peak" if math.cos(phase) < 0 else "dip"
        print(f"  {kind}/plateau (analytic): {analytic:.3f}")
        try:
            sampled, err = delay_contrast(result, fwhm, sampled=True)
            print(f"  {kind}/plateau (sampled):  {sampled:.3f} ± {err:.3f}")
        except TimebinError as exc:
            print(f"  {kind}/plateau (sampled):  unavailable ({exc})")
        print(f"  CSV: {out}")
        outputs.append(out)
    _finish(args, settings, outputs, started)
    return EXIT_OK


def _cmd_cz_check(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    # the gate uses ideal elements; settings reach only the manifest
    settings = getattr(args, "settings", None) or TimebinConfig()
    compensation = CompensationStyle(args.compensation)
    extinction = args.extinction_db if args.extinction_db is not None else math.inf
    report = cz_gate_report(compensation, extinction)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2)

    print(f"CZ gate ({compensation.value} compensation, extinction {extinction} dB)")
    for label, row in zip(report.basis, report.operator):
        print(f"  {label}: " + "  ".join(f"{z.real:+.4f}{z.imag:+.4f}j" for z in row))
    print(f"  success probabilities: {', '.join(f'{p:.6f}' for p in report.success_probabilities)}")
    print(f"  process fidelity: {report.fidelity:.12f}")
    print(f"  |+>|+> concurrence: {report.plus_plus_concurrence:.9f}")
    print(f"Report: {out}")
    _finish(args, settings, [out], started)

    if math.isinf(extinction):
        report.check_contract()
        print("Gate contract satisfied")
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    manifest = RunManifest.load(Path(args.manifest))
    replayed = build_parser().parse_args(manifest.argv)
    if replayed.command == "replay":
        raise ConfigError("a manifest cannot replay another replay")
    replayed.settings = config_from_dict(manifest.config)
    replayed.argv = manifest.argv
    logger.info("replay argv: %s", " ".join(manifest.argv))
    if args.out:
        replayed.out = args.out
    print(f"Replaying '{manifest.command}' from {args.manifest}")
    return replayed.func(replayed)


# =============================================================================
# PARSER
# =============================================================================

def _add_run_options(sub: argparse.ArgumentParser, default_out: str) -> None:
    sub.add_argument("--config", default=None,
                     help=f"INI config file (default: ${CONFIG_ENV_VAR}, else laboratory defaults)")
    sub.add_argument("--pulses", type=int, default=None, help="start pulses per scan point")
    sub.add_argument("--seed", type=int, default=None, help="master random seed")
    sub.add_argument("--workers", type=int, default=None, help="parallel sampling workers")
    sub.add_argument("--ideal", action="store_true", help="disable every imperfection")
    sub.add_argument("--out", default=default_out, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timebin", description="Time-bin switch entangler simulator")
    parser.add_argument("--verbose", action="store_true", help="log per-point progress")
    sub = parser.add_subparsers(dest="command", required=True)

    hom = sub.add_parser("hom-scan", help="Hong-Ou-Mandel dip versus relative delay")
    _add_run_options(hom, "hom_scan.csv")
    hom.add_argument("--delays", type=parse_values, default=parse_values(DEFAULT_HOM_DELAYS),
                     help="delays in ps, 'a,b,c' or 'start:stop:step'")
    hom.set_defaults(func=_cmd_hom_scan)

    fringe = sub.add_parser("fringe-scan", help="two-photon fringe versus Charlie's phase")
    _add_run_options(fringe, "fringe_scan.csv")
    fringe.add_argument("--david-phase", type=parse_phase, default=0.0, help="David's phase, e.g. 0 or pi/2")
    fringe.add_argument("--phases", type=_phase_list, default=None, help="Charlie's phases (>= 5 values)")
    fringe.set_defaults(func=_cmd_fringe_scan)

    delay = sub.add_parser("delay-scan", help="bunching / anti-bunching versus relative delay")
    _add_run_options(delay, "delay_scan.csv")
    delay.add_argument("--charlie-phase", type=parse_phase, default=None,
                       help="pi or 2pi (default: both traces)")
    delay.add_argument("--delays", type=parse_values, default=parse_values(DEFAULT_DELAY_SCAN),
                       help="delays in ps")
    delay.set_defaults(func=_cmd_delay_scan)

    cz = sub.add_parser("cz-check", help="three-switch CZ gate contract")
    cz.add_argument("--out", default="cz_report.json", help="report path")
    cz.add_argument("--compensation", choices=[c.value for c in CompensationStyle],
                    default=CompensationStyle.SWITCH.value)
    cz.add_argument("--extinction-db", type=float, default=None,
                    help="finite switch extinction (reported, not asserted)")
    cz.set_defaults(func=_cmd_cz_check, seed=None)

    replay = sub.add_parser("replay", help="rerun a command from its manifest")
    replay.add_argument("manifest")
    replay.add_argument("--out", default=None, help="override the output path")
    replay.set_defaults(func=_cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args.argv = [a for a in argv if a != "--verbose"]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GateContractViolation as exc:
        print(f"Gate contract violated: {exc}", file=sys.stderr)
        return EXIT_GATE
    except TimebinError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"Runtime invariant violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
