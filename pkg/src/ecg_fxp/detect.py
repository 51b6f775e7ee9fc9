"""Adaptive dual-channel (SF and SI) thresholding with refractory suppression.

The detector logic is written once and parametrized by an arithmetic
backend: :class:`FixedArith` works on raw integers of an ``FxpFormat`` with
shift-based blends, :class:`FloatArith` on doubles. The float oracle uses
the same state machine so the two paths can only differ numerically.

SF is tracked rectified (``|sf|``) since the band-passed signal is bipolar.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Protocol, Sequence

from .config import RunConfig
from .fxp import FxpFormat, FxpValue

log = logging.getLogger(__name__)


class DetectorError(RuntimeError):
    pass


class InsufficientSignalError(DetectorError, ValueError):
    pass


class Arith(Protocol):
    def blend(self, peak, estimate): ...
    def threshold(self, spk, npk): ...
    def mean(self, values: Sequence) -> object: ...
    def to_real(self, v) -> float: ...


class FixedArith:
    """Shift-and-add arithmetic: 0.125/0.875 blend and 0.25 mix are shifts."""

    def __init__(self, fmt: FxpFormat):
        self.fmt = fmt

    def blend(self, peak: int, estimate: int) -> int:
        return self.fmt.saturate(estimate + ((peak - estimate) >> 3))

    def threshold(self, spk: int, npk: int) -> int:
        return self.fmt.saturate(npk + ((spk - npk) >> 2))

    def mean(self, values: Sequence[int]) -> int:
        return sum(int(v) for v in values) // len(values)

    def to_real(self, v: int) -> float:
        return self.fmt.to_real(v)


class FloatArith:
    def blend(self, peak: float, estimate: float) -> float:
        return 0.125 * peak + 0.875 * estimate

    def threshold(self, spk: float, npk: float) -> float:
        return npk + 0.25 * (spk - npk)

    def mean(self, values: Sequence[float]) -> float:
        return float(sum(float(v) for v in values)) / len(values)

    def to_real(self, v: float) -> float:
        return float(v)


@dataclass
class ThresholdState:
    """Running peak estimates; raw ints on the fixed path, floats on the oracle."""

    spk_i: object = 0
    npk_i: object = 0
    thr_i: object = 0
    spk_f: object = 0
    npk_f: object = 0
    thr_f: object = 0
    refractory_until: int = 0
    seeded: bool = False

    def as_fxp(self, fmt: FxpFormat) -> dict[str, FxpValue]:
        names = ("spk_i", "npk_i", "thr_i", "spk_f", "npk_f", "thr_f")
        return {n: FxpValue(int(getattr(self, n)), fmt) for n in names}


@dataclass(frozen=True)
class QrsEvent:
    si_peak_index: int
    sf_peak_index: int
    si_peak_value: object
    sf_peak_value: object


def moving_means(values: Sequence, window: int, arith: Arith) -> list:
    return [arith.mean(values[i : i + window]) for i in range(len(values) - window + 1)]


class QrsDetector:
    """Streaming QRS detector over (index, sf, si) samples.

    SI local maxima are decided ``coincidence_samples`` after they occur so
    the SF peak can be looked up on both sides. Maxima that do not dominate
    SI within half a refractory period (ripples on the flank of a larger
    lobe) are dropped outright. A candidate becomes a beat
    when the SI peak exceeds ``thr_i``, the largest ``|sf|`` within the
    coincidence window exceeds ``thr_f`` and the refractory period has
    elapsed; the signal estimates of both channels then move 1/8 of the way
    towards the peaks. Any other sub-threshold SI maximum is a noise peak and
    moves ``npk_i`` (and ``npk_f`` when the SF peak is also sub-threshold).
    """

    def __init__(self, config: RunConfig, arith: Arith, on_update=None):
        self.config = config
        self.arith = arith
        self.state = ThresholdState()
        # called after every threshold update; used by invariant tests
        self.on_update = on_update
        w = config.coincidence_samples
        self._sf_hist: deque[tuple[int, object]] = deque(maxlen=2 * w + 1)
        self._si_hist: deque[tuple[int, object]] = deque(maxlen=2 * w + 1)
        self.dominance = min(config.refractory_samples // 2, w)
        self._pending: deque[tuple[int, object]] = deque()
        self._prev_si = None
        self._prev_index = None
        self._rising = False
        self._last_event: int | None = None

    # -- seeding ----------------------------------------------------------

    def seed(self, sf: Sequence, si: Sequence) -> None:
        """Initialise both channels from at least ``seed_samples`` of taps."""
        n = self.config.seed_samples
        if len(si) < n or len(sf) < n:
            raise InsufficientSignalError(
                f"threshold seeding needs {n} samples after warm-up, got {min(len(si), len(sf))}"
            )
        w = self.config.threshold_window_samples
        st = self.state
        for chan, vals in (("i", list(si[:n])), ("f", [abs(v) for v in sf[:n]])):
            spk = max(moving_means(vals, w, self.arith))
            npk = self.arith.mean(vals)
            setattr(st, f"spk_{chan}", spk)
            setattr(st, f"npk_{chan}", npk)
            setattr(st, f"thr_{chan}", self.arith.threshold(spk, npk))
        st.seeded = True
        self._notify()

    # -- per-sample -------------------------------------------------------

    def step(self, index: int, sf, si) -> QrsEvent | None:
        if not self.state.seeded:
            raise DetectorError("detector used before seed()")
        self._sf_hist.append((index, abs(sf)))
        self._si_hist.append((index, si))
        if self._prev_si is not None:
            if si > self._prev_si:
                self._rising = True
            elif si < self._prev_si:
                if self._rising:
                    self._pending.append((self._prev_index, self._prev_si))
                self._rising = False
        self._prev_si, self._prev_index = si, index

        if self._pending and self._pending[0][0] + self.config.coincidence_samples <= index:
            return self._decide(*self._pending.popleft())
        return None

    def flush(self) -> list[QrsEvent]:
        """Decide candidates still waiting for their SF look-ahead."""
        events = []
        while self._pending:
            ev = self._decide(*self._pending.popleft())
            if ev is not None:
                events.append(ev)
        return events

    def _sf_peak(self, center: int) -> tuple[int, object]:
        w = self.config.coincidence_samples
        best = None
        for idx, v in self._sf_hist:
            if center - w <= idx <= center + w and (best is None or v > best[1]):
                best = (idx, v)
        return best if best is not None else (center, 0)

    def _dominates(self, m: int, v) -> bool:
        d = self.dominance
        return all(s <= v for idx, s in self._si_hist if m - d <= idx <= m + d)

    def _decide(self, m: int, v) -> QrsEvent | None:
        st, ar = self.state, self.arith
        if not self._dominates(m, v):
            return None
        sf_idx, sf_v = self._sf_peak(m)
        if v > st.thr_i:
            if sf_v > st.thr_f and m >= st.refractory_until:
                st.spk_i = ar.blend(v, st.spk_i)
                st.spk_f = ar.blend(sf_v, st.spk_f)
                self._refresh()
                st.refractory_until = m + self.config.refractory_samples + 1
                self._last_event = m
                return QrsEvent(m, sf_idx, v, sf_v)
            return None
        st.npk_i = ar.blend(v, st.npk_i)
        if sf_v <= st.thr_f:
            st.npk_f = ar.blend(sf_v, st.npk_f)
        self._refresh()
        return None

    def _refresh(self) -> None:
        st, ar = self.state, self.arith
        st.npk_i = min(st.npk_i, st.spk_i)
        st.npk_f = min(st.npk_f, st.spk_f)
        st.thr_i = ar.threshold(st.spk_i, st.npk_i)
        st.thr_f = ar.threshold(st.spk_f, st.npk_f)
        self._notify()

    def _notify(self) -> None:
        if self.on_update is not None:
            self.on_update(self.state)
