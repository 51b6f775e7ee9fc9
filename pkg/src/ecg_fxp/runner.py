"""End-to-end runs: stages -> detector -> feature extractors -> beats."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .detect import Arith, FixedArith, InsufficientSignalError, QrsDetector, QrsEvent
from .features import BeatFeatures, RPeakTracker, WidthCounter, assemble_beats
from .fxp import quantize_array
from .ingest import EcgRecord, resample_to_200
from .stages import PIPELINE_DELAY, TapArrays, process_batch


@dataclass
class Extraction:
    events: list[QrsEvent]
    widths: list[tuple[int, int]]  # (SI peak index, width)
    rpeaks: list[int]
    thr_i: list  # per-sample live SI threshold, 0 before seeding
    beats: list[BeatFeatures]


def extract(sf, si, raw, config: RunConfig, arith: Arith, on_update=None) -> Extraction:
    """Run detection and feature extraction over whole SF/SI sequences.

    Samples before ``warmup_samples`` are ignored. Thresholds are seeded
    from the ``seed_samples`` that follow, then detection starts again at
    the end of warm-up so beats inside the seed window are not lost.
    R-peak turns are kept only when they sit above the live threshold and
    dominate SI over the same neighbourhood the detector uses.
    """
    sf, si = list(sf), list(si)
    n = len(si)
    start = config.warmup_samples
    if n < start + config.seed_samples:
        raise InsufficientSignalError(
            f"need {start + config.seed_samples} samples (warm-up + seed), got {n}"
        )
    det = QrsDetector(config, arith, on_update=on_update)
    det.seed(sf[start:], si[start:])
    width = WidthCounter(config.holdoff_samples)
    rpeak = RPeakTracker(config.rise_guard_samples)

    events: list[QrsEvent] = []
    widths: list[tuple[int, int]] = []
    turns: list[int] = []
    zero = si[0] - si[0]
    thr_trace = [zero] * n
    for i in range(start, n):
        ev = det.step(i, sf[i], si[i])
        if ev is not None:
            events.append(ev)
        thr = det.state.thr_i
        thr_trace[i] = thr
        w = width.step(si[i], si[i - 1], thr, i)
        if w is not None:
            widths.append((width.peak_index, w))
        r = rpeak.step(si[i], i)
        # turns below the live threshold are pre-QRS bumps, not R lobes
        if r is not None and si[r] > thr:
            turns.append(r)
    events.extend(det.flush())
    d = det.dominance
    rpeaks = [r for r in turns if si[r] >= max(si[max(r - d, 0) : r + d + 1])]
    beats = assemble_beats(
        events,
        widths,
        rpeaks,
        config.fs,
        PIPELINE_DELAY,
        raw=raw,
        match_window=config.coincidence_samples,
        refine_radius=config.refine_samples,
    )
    return Extraction(events, widths, rpeaks, thr_trace, beats)


@dataclass
class FixedRun:
    signal: np.ndarray  # real-valued input at the design rate
    taps: TapArrays
    extraction: Extraction
    config: RunConfig = field(default_factory=RunConfig)

    @property
    def beats(self) -> list[BeatFeatures]:
        return self.extraction.beats

    @property
    def events(self) -> list[QrsEvent]:
        return self.extraction.events


def prepare(record: EcgRecord, config: RunConfig) -> EcgRecord:
    if config.resample and record.fs != config.fs:
        record = resample_to_200(record)
    if record.fs != config.fs:
        raise ValueError(f"record is at {record.fs} Hz but the pipeline runs at {config.fs} Hz")
    return record


def run_fixed(signal, config: RunConfig | None = None) -> FixedRun:
    """Fixed-point run over a real-valued signal already at ``config.fs``."""
    config = config or RunConfig()
    signal = np.asarray(signal, dtype=np.float64)
    raw = quantize_array(signal, config.fmt)
    taps = process_batch(raw, config.fmt)
    ex = extract(taps.sf.tolist(), taps.si.tolist(), signal, config, FixedArith(config.fmt))
    return FixedRun(signal, taps, ex, config)
