"""Double-precision golden model of the whole chain, and run comparison.

The stages are re-derived here in float64 straight from the difference
equations (no shared code with the fixed-point stages). Detection and
feature extraction reuse the same state machines with float arithmetic, and
both paths read their constants from the same ``RunConfig``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .evaluate import match_indices
from .detect import FloatArith
from .features import BeatFeatures
from .fxp import quantize_array
from .runner import Extraction, FixedRun, extract

STAGES = ("raw", "sf", "derivative", "squared", "si")


class ComparisonError(ValueError):
    pass


def lowpass(x: np.ndarray) -> np.ndarray:
    y = np.zeros(len(x))
    for n in range(len(x)):
        y[n] = (
            (2 * y[n - 1] if n >= 1 else 0.0)
            - (y[n - 2] if n >= 2 else 0.0)
            + x[n]
            - (2 * x[n - 6] if n >= 6 else 0.0)
            + (x[n - 12] if n >= 12 else 0.0)
        )
    return y


def highpass(x: np.ndarray) -> np.ndarray:
    y = np.zeros(len(x))
    for n in range(len(x)):
        y[n] = (
            (y[n - 1] if n >= 1 else 0.0)
            - x[n] / 32
            + (x[n - 16] if n >= 16 else 0.0)
            - (x[n - 17] if n >= 17 else 0.0)
            + (x[n - 32] / 32 if n >= 32 else 0.0)
        )
    return y


def derivative(x: np.ndarray) -> np.ndarray:
    xp = np.concatenate([np.zeros(4), x])
    return (2 * xp[4:] + xp[3:-1] - xp[1:-3] - 2 * xp[:-4]) / 8


def square(x: np.ndarray) -> np.ndarray:
    return x * x


def integrate(x: np.ndarray, window: int = 32) -> np.ndarray:
    y = np.zeros(len(x))
    for n in range(len(x)):
        lo = max(n - window, 0)
        y[n] = x[lo:n].sum() / window
    return y


@dataclass
class FloatTaps:
    raw: np.ndarray
    sf: np.ndarray
    derivative: np.ndarray
    squared: np.ndarray
    si: np.ndarray

    def __len__(self) -> int:
        return len(self.raw)

    def real(self, stage: str) -> np.ndarray:
        return getattr(self, stage)


def run_stages(signal) -> FloatTaps:
    x = np.asarray(signal, dtype=np.float64)
    sf = highpass(lowpass(x))
    d = derivative(sf)
    sq = square(d)
    return FloatTaps(x, sf, d, sq, integrate(sq))


@dataclass
class ReferenceRun:
    taps: FloatTaps
    extraction: Extraction
    config: RunConfig = field(default_factory=RunConfig)

    @property
    def beats(self) -> list[BeatFeatures]:
        return self.extraction.beats

    @property
    def events(self):
        return self.extraction.events


def run_reference(signal, fs: float | None = None, config: RunConfig | None = None) -> ReferenceRun:
    config = config or RunConfig()
    x = np.asarray(signal, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty signal")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite sample at index {int(np.flatnonzero(~np.isfinite(x))[0])}")
    if fs is not None and fs != config.fs:
        raise ValueError(f"signal is at {fs} Hz but the pipeline runs at {config.fs} Hz")
    taps = run_stages(x)
    ex = extract(taps.sf.tolist(), taps.si.tolist(), x, config, FloatArith())
    return ReferenceRun(taps, ex, config)


@dataclass
class ComparisonReport:
    stage_max_abs_dev: dict[str, float]
    matched: list[tuple[int, int]]  # (fixed r-peak, reference r-peak)
    fixed_only: list[int]
    reference_only: list[int]
    tolerance_samples: int

    @property
    def index_deltas(self) -> list[int]:
        return [f - r for f, r in self.matched]

    @property
    def beats_agree(self) -> bool:
        return not self.fixed_only and not self.reference_only

    def summary(self) -> str:
        lines = ["stage        max |fixed - reference|"]
        for stage, dev in self.stage_max_abs_dev.items():
            lines.append(f"{stage:<12} {dev:.3e}")
        deltas = self.index_deltas
        worst = max((abs(d) for d in deltas), default=0)
        lines.append(
            f"beats matched {len(self.matched)}, fixed-only {len(self.fixed_only)}, "
            f"reference-only {len(self.reference_only)}, "
            f"worst index delta {worst} (tolerance {self.tolerance_samples})"
        )
        return "\n".join(lines)


def compare_runs(fixed: FixedRun, ref: ReferenceRun, tolerance_samples: int = 3) -> ComparisonReport:
    if len(fixed.taps) != len(ref.taps):
        raise ComparisonError(
            f"runs differ in length: fixed {len(fixed.taps)}, reference {len(ref.taps)}"
        )
    dev = {
        s: float(np.max(np.abs(fixed.taps.real(s) - ref.taps.real(s)), initial=0.0)) for s in STAGES
    }
    pairs, f_only, r_only = match_indices(
        [b.r_peak_index for b in fixed.beats],
        [b.r_peak_index for b in ref.beats],
        tolerance_samples,
    )
    return ComparisonReport(dev, pairs, f_only, r_only, tolerance_samples)


def quantized_input(signal, config: RunConfig) -> np.ndarray:
    """The signal as the fixed-point datapath sees it, back in real units."""
    return quantize_array(signal, config.fmt).astype(np.float64) * config.fmt.resolution
