"""Pan-Tompkins stages as resettable streaming operators in fixed point.

All coefficients are small integers or powers of two, so every stage is a
handful of integer adds plus arithmetic shifts. Internal accumulators carry
guard bits (they are bounded by each filter's absolute gain); only the
stage outputs are saturated to the datapath format. Consequently the
recursive low-pass and high-pass are bit-identical to their FIR expansions,
which is what :func:`process_batch` computes.

Difference equations, with x the stage input and y its output::

    low-pass    y(n) = 2y(n-1) - y(n-2) + x(n) - 2x(n-6) + x(n-12)
    high-pass   y(n) = y(n-1) - x(n)/32 + x(n-16) - x(n-17) + x(n-32)/32
    derivative  y(n) = (2x(n) + x(n-1) - x(n-3) - 2x(n-4)) / 8
    square      y(n) = x(n)^2
    integrator  y(n) = (1/32) * sum_{i=1..32} x(n-i)
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .fxp import DEFAULT_FORMAT, FormatMismatchError, FxpFormat, FxpValue, mul_raw

WINDOW = 32
LOWPASS_TAPS = np.array([1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1], dtype=np.int64)
# 32 * high-pass impulse response: -1 everywhere in 0..31 except +31 at lag 16.
HIGHPASS_TAPS_X32 = np.full(WINDOW, -1, dtype=np.int64)
HIGHPASS_TAPS_X32[16] += WINDOW
DERIVATIVE_TAPS_X8 = np.array([2, 1, 0, -1, -2], dtype=np.int64)

LOWPASS_DELAY = 5
HIGHPASS_DELAY = 16
DERIVATIVE_DELAY = 2
INTEGRATOR_DELAY = 16
# raw-input sample -> SI sample carrying its energy peak
PIPELINE_DELAY = LOWPASS_DELAY + HIGHPASS_DELAY + DERIVATIVE_DELAY + INTEGRATOR_DELAY


class LowPass:
    """Double-pole integer low-pass, DC gain 36, delay 5 samples."""

    def __init__(self, fmt: FxpFormat = DEFAULT_FORMAT):
        self.fmt = fmt
        self.reset()

    def reset(self) -> None:
        self.x_hist: deque[int] = deque([0] * 12, maxlen=12)  # x(n-1) .. x(n-12)
        self.y1 = 0
        self.y2 = 0

    def step_raw(self, x: int) -> int:
        h = self.x_hist
        y = 2 * self.y1 - self.y2 + x - 2 * h[5] + h[11]
        h.appendleft(x)
        self.y2, self.y1 = self.y1, y
        return self.fmt.saturate(y)

    def step(self, x: FxpValue) -> FxpValue:
        return FxpValue(self.step_raw(x.raw), self.fmt)


class HighPass:
    """All-pass minus 32-sample mean; DC gain 0, delay 16 samples.

    The accumulator holds 32 * y exactly, so the divide-by-32 is a single
    truncating shift at the output and the recursion cannot drift.
    """

    def __init__(self, fmt: FxpFormat = DEFAULT_FORMAT):
        self.fmt = fmt
        self.reset()

    def reset(self) -> None:
        self.x_hist: deque[int] = deque([0] * WINDOW, maxlen=WINDOW)  # x(n-1) .. x(n-32)
        self.acc = 0

    def step_raw(self, x: int) -> int:
        h = self.x_hist
        self.acc += -x + WINDOW * (h[15] - h[16]) + h[31]
        h.appendleft(x)
        return self.fmt.saturate(self.acc >> 5)

    def step(self, x: FxpValue) -> FxpValue:
        return FxpValue(self.step_raw(x.raw), self.fmt)


class Derivative:
    """Five-point derivative, delay 2 samples."""

    def __init__(self, fmt: FxpFormat = DEFAULT_FORMAT):
        self.fmt = fmt
        self.reset()

    def reset(self) -> None:
        self.x_hist: deque[int] = deque([0] * 4, maxlen=4)

    def step_raw(self, x: int) -> int:
        h = self.x_hist
        acc = 2 * x + h[0] - h[2] - 2 * h[3]
        h.appendleft(x)
        return self.fmt.saturate(acc >> 3)

    def step(self, x: FxpValue) -> FxpValue:
        return FxpValue(self.step_raw(x.raw), self.fmt)


def square_step(x: FxpValue) -> FxpValue:
    return FxpValue(mul_raw(x.raw, x.raw, x.fmt), x.fmt)


class Integrator:
    """Mean of the 32 previous inputs (the current input is not included)."""

    def __init__(self, fmt: FxpFormat = DEFAULT_FORMAT):
        self.fmt = fmt
        self.reset()

    def reset(self) -> None:
        self.buffer = [0] * WINDOW
        self.pos = 0
        self.total = 0

    def step_raw(self, x: int) -> int:
        y = self.fmt.saturate(self.total >> 5)
        self.total += x - self.buffer[self.pos]
        self.buffer[self.pos] = x
        self.pos = (self.pos + 1) % WINDOW
        return y

    def step(self, x: FxpValue) -> FxpValue:
        return FxpValue(self.step_raw(x.raw), self.fmt)


@dataclass(frozen=True)
class PipelineTap:
    raw_in: FxpValue
    sf: FxpValue
    derivative_out: FxpValue
    squared: FxpValue
    si: FxpValue
    sample_index: int


@dataclass
class TapArrays:
    """Whole-run stage outputs as raw integer arrays."""

    raw: np.ndarray
    sf: np.ndarray
    derivative: np.ndarray
    squared: np.ndarray
    si: np.ndarray
    fmt: FxpFormat = DEFAULT_FORMAT

    STAGES = ("raw", "sf", "derivative", "squared", "si")

    def __len__(self) -> int:
        return len(self.raw)

    def tap(self, i: int) -> PipelineTap:
        v = lambda arr: FxpValue(int(arr[i]), self.fmt)  # noqa: E731
        return PipelineTap(v(self.raw), v(self.sf), v(self.derivative), v(self.squared), v(self.si), i)

    def real(self, stage: str) -> np.ndarray:
        return np.asarray(getattr(self, stage), dtype=np.float64) * self.fmt.resolution

    @classmethod
    def from_taps(cls, taps: list[PipelineTap], fmt: FxpFormat) -> TapArrays:
        dtype = fmt.numpy_dtype
        col = lambda name: np.array([getattr(t, name).raw for t in taps], dtype=dtype)  # noqa: E731
        return cls(col("raw_in"), col("sf"), col("derivative_out"), col("squared"), col("si"), fmt)


class Pipeline:
    """LP -> HP -> derivative -> square -> integrate, one sample at a time."""

    def __init__(self, fmt: FxpFormat = DEFAULT_FORMAT):
        self.fmt = fmt
        self.lowpass = LowPass(fmt)
        self.highpass = HighPass(fmt)
        self.derivative = Derivative(fmt)
        self.integrator = Integrator(fmt)
        self.index = 0

    def reset(self) -> None:
        for stage in (self.lowpass, self.highpass, self.derivative, self.integrator):
            stage.reset()
        self.index = 0

    def step(self, raw: FxpValue) -> PipelineTap:
        if raw.fmt != self.fmt:
            raise FormatMismatchError(f"pipeline runs {self.fmt}, sample is {raw.fmt}")
        lp = self.lowpass.step(raw)
        sf = self.highpass.step(lp)
        d = self.derivative.step(sf)
        sq = square_step(d)
        si = self.integrator.step(sq)
        tap = PipelineTap(raw, sf, d, sq, si, self.index)
        self.index += 1
        return tap

    def run(self, raw: np.ndarray) -> TapArrays:
        """Stream a raw-integer array through :meth:`step`."""
        taps = [self.step(FxpValue(int(r), self.fmt)) for r in raw]
        return TapArrays.from_taps(taps, self.fmt)


def _fir(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Causal FIR y(n) = sum_k taps[k] x(n-k) in exact integer arithmetic."""
    if x.dtype == object:
        return np.convolve(x, taps.astype(object))[: len(x)]
    return np.convolve(x, taps)[: len(x)]


def process_batch(raw, fmt: FxpFormat = DEFAULT_FORMAT) -> TapArrays:
    """Whole-array equivalent of streaming every sample through :class:`Pipeline`.

    Uses the FIR expansions of the recursive stages, so it doubles as an
    independent check on the streaming recursions.
    """
    dtype = fmt.numpy_dtype
    raw = np.asarray(raw).astype(dtype)
    lo, hi = fmt.min_raw, fmt.max_raw
    sat = lambda a: np.clip(a, lo, hi).astype(dtype)  # noqa: E731

    lp = sat(_fir(raw, LOWPASS_TAPS))
    sf = sat(_fir(lp, HIGHPASS_TAPS_X32) >> 5)
    d = sat(_fir(sf, DERIVATIVE_TAPS_X8) >> 3)
    sq = sat((d * d) >> fmt.frac_bits)
    window_sum = _fir(sq, np.ones(WINDOW, dtype=np.int64))
    si = np.zeros_like(window_sum)
    si[1:] = window_sum[:-1]
    si = sat(si >> 5)
    return TapArrays(raw, sf, d, sq, si, fmt)
