"""Command-line entry point.

    ecg-fxp run data/mitdb/100 --duration-s 60
    ecg-fxp stages data/mitdb/100 -o taps.csv --duration-s 10
    ecg-fxp bench data/mitdb/100 data/mitdb/100_ann.csv --duration-s 600
    ecg-fxp compare data/mitdb/100 --duration-s 30
    ecg-fxp synth --bpm 72 -o synth.csv --annotations synth_ann.csv

Exit status: 0 success, 1 I/O or parse error, 2 benchmark floor not met.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .detect import DetectorError
from .evaluate import bench
from .fxp import FxpError, FxpFormat
from .ingest import (
    EcgRecord,
    IngestError,
    load_input,
    read_annotations_csv,
    rescale_annotations,
    synth_beats,
    write_annotations_csv,
    write_csv,
)
from .reference import compare_runs, quantized_input, run_reference
from .runner import prepare, run_fixed

EXIT_OK, EXIT_IO, EXIT_FLOOR = 0, 1, 2

log = logging.getLogger("ecg_fxp")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline configuration")
    g.add_argument("--config", type=Path, help="key=value file with RunConfig fields")
    g.add_argument("--word-bits", type=int, help="fixed-point word length (default 32)")
    g.add_argument("--frac-bits", type=int, help="fixed-point fraction length (default 16)")
    g.add_argument("--refractory", type=int, dest="refractory_samples", help="detector refractory, samples (40)")
    g.add_argument("--holdoff", type=int, dest="holdoff_samples", help="width counter hold-off, samples (20)")
    g.add_argument("--rise-guard", type=int, dest="rise_guard_samples", help="R-peak rise guard, samples (50)")
    g.add_argument("--seed-seconds", type=float, dest="seed_seconds", help="threshold seeding span (2 s)")
    g.add_argument("--warmup", type=int, dest="warmup_samples", help="transient samples ignored (64)")
    g.add_argument("--no-resample", action="store_true", help="do not resample 360 Hz input to 200 Hz")
    g.add_argument("--channel", type=int, choices=(0, 1), help="signal of a two-signal record (0)")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", type=Path, help="signal CSV (fs=<hz> header) or WFDB record path")
    p.add_argument("--start-s", type=float, default=0.0, help="excerpt start, seconds")
    p.add_argument("--duration-s", type=float, help="excerpt length, seconds (default: to the end)")
    _add_config_flags(p)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    updates = {
        k: getattr(args, k)
        for k in (
            "refractory_samples",
            "holdoff_samples",
            "rise_guard_samples",
            "seed_seconds",
            "warmup_samples",
            "channel",
        )
        if getattr(args, k) is not None
    }
    if args.no_resample:
        updates["resample"] = False
    word = args.word_bits if args.word_bits is not None else cfg.fmt.word_bits
    frac = args.frac_bits if args.frac_bits is not None else cfg.fmt.frac_bits
    return replace(cfg, fmt=FxpFormat(word, frac), **updates)


def _load(args: argparse.Namespace, cfg: RunConfig) -> tuple[EcgRecord, int]:
    """Record at the design rate, cut to the excerpt; also the excerpt start in native samples."""
    rec = load_input(args.input, cfg.channel)
    start_native = int(round(args.start_s * rec.fs))
    if args.start_s or args.duration_s is not None:
        length = args.duration_s if args.duration_s is not None else rec.duration_s - args.start_s
        rec = rec.excerpt(args.start_s, length)
    return prepare(rec, cfg), start_native


def cmd_run(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    rec, _ = _load(args, cfg)
    result = run_fixed(rec.samples, cfg)
    out = sys.stdout
    if args.human:
        out.write(f"{'r_peak':>8} {'time_s':>9} {'qrs_w':>5} {'rr':>5} {'hr_bpm':>7}\n")
    else:
        out.write("r_peak_index,time_s,qrs_width_samples,rr_samples,hr_bpm\n")
    for b in result.beats:
        t = b.r_peak_index / cfg.fs
        w = "" if b.qrs_width_samples is None else str(b.qrs_width_samples)
        rr = "" if b.rr_interval_samples is None else str(b.rr_interval_samples)
        hr = "" if b.heart_rate_bpm is None else f"{b.heart_rate_bpm:.3f}"
        if args.human:
            out.write(f"{b.r_peak_index:>8} {t:>9.3f} {w or '-':>5} {rr or '-':>5} {hr or '-':>7}\n")
        else:
            out.write(f"{b.r_peak_index},{t:.4f},{w},{rr},{hr}\n")
    return EXIT_OK


def cmd_stages(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    rec, _ = _load(args, cfg)
    result = run_fixed(rec.samples, cfg)
    taps, res = result.taps, cfg.fmt.resolution
    flags = np.zeros(len(taps), dtype=int)
    for b in result.beats:
        flags[b.r_peak_index] = 1
    thr = result.extraction.thr_i
    lines = ["index,raw,sf,derivative,squared,si,thr_i,qrs_flag"]
    cols = [taps.raw, taps.sf, taps.derivative, taps.squared, taps.si]
    for i in range(len(taps)):
        vals = ",".join(repr(int(c[i]) * res) for c in cols)
        lines.append(f"{i},{vals},{repr(int(thr[i]) * res)},{flags[i]}")
    text = "\n".join(lines) + "\n"
    if args.output is None or str(args.output) == "-":
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    native = load_input(args.input, cfg.channel)
    rec, start = _load(args, cfg)
    ann = read_annotations_csv(args.annotations.read_text(), native.fs, str(args.annotations))
    ann = ann.window(start, start + int(round(len(rec) * native.fs / rec.fs)))
    ann = rescale_annotations(ann, rec.fs)
    ann = ann.window(0, len(rec))
    if args.oracle:
        beats = run_reference(rec.samples, rec.fs, cfg).beats
    else:
        beats = run_fixed(rec.samples, cfg).beats
    report = bench([b.r_peak_index for b in beats], ann.beat_indices, args.match_window)
    print(report.summary())
    if not report.passes(args.min_sensitivity, args.min_ppv):
        print(
            f"FAIL: below floor (Se >= {args.min_sensitivity}, +P >= {args.min_ppv})",
            file=sys.stderr,
        )
        return EXIT_FLOOR
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    rec, _ = _load(args, cfg)
    fixed = run_fixed(rec.samples, cfg)
    ref = run_reference(quantized_input(rec.samples, cfg), rec.fs, cfg)
    report = compare_runs(fixed, ref, args.tolerance)
    print(f"format {cfg.fmt}, {len(rec)} samples")
    print(report.summary())
    print("beat sets agree" if report.beats_agree else "beat sets DIFFER")
    if args.max_deviation is not None:
        worst = max(report.stage_max_abs_dev.values())
        if worst >= args.max_deviation or not report.beats_agree:
            return EXIT_FLOOR
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    rec, ann = synth_beats(
        fs=args.fs,
        bpm=args.bpm,
        amplitude=args.amplitude,
        qrs_width_ms=args.width_ms,
        duration_s=args.duration_s,
        noise_amplitude=args.noise,
        first_beat_s=args.first_beat_s,
        seed=args.seed,
    )
    text = write_csv(rec)
    if args.output is None or str(args.output) == "-":
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    if args.annotations is not None:
        args.annotations.write_text(write_annotations_csv(ann))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecg-fxp",
        description="Fixed-point Pan-Tompkins QRS detection and ECG feature extraction.",
        epilog="Exit status: 0 ok, 1 I/O or parse error, 2 benchmark floor not met.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="detect beats and print the beat table")
    _add_input(p)
    p.add_argument("--human", action="store_true", help="aligned columns instead of CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("stages", help="dump per-sample stage taps as CSV (real units)")
    _add_input(p)
    p.add_argument("-o", "--output", type=Path, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_stages)

    p = sub.add_parser("bench", help="score detections against annotation indices")
    _add_input(p)
    p.add_argument("annotations", type=Path, help="annotation CSV, indices in the record's native rate")
    p.add_argument("--match-window", type=int, default=30, help="+/- samples at 200 Hz (30 = 150 ms)")
    p.add_argument("--min-sensitivity", type=float, default=0.0)
    p.add_argument("--min-ppv", type=float, default=0.0)
    p.add_argument("--oracle", action="store_true", help="score the float reference instead")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="fixed-point vs double-precision reference")
    _add_input(p)
    p.add_argument("--tolerance", type=int, default=3, help="beat index tolerance, samples")
    p.add_argument("--max-deviation", type=float, help="exit 2 if any stage deviates this much")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a synthetic beat train as signal CSV")
    p.add_argument("--fs", type=float, default=200.0)
    p.add_argument("--bpm", type=float, default=72.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--width-ms", type=float, default=100.0)
    p.add_argument("--duration-s", type=float, default=10.0)
    p.add_argument("--noise", type=float, default=0.0, help="uniform noise half-range")
    p.add_argument("--first-beat-s", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", type=Path, help="signal CSV path (default stdout)")
    p.add_argument("--annotations", type=Path, help="also write beat indices here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (OSError, IngestError, ConfigError, FxpError, DetectorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
