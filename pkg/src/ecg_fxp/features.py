"""Per-beat features: QRS width, R-peak / R-R interval, heart rate."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .detect import QrsEvent

log = logging.getLogger(__name__)


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class BeatFeatures:
    """One detected beat, indices in the raw-signal timebase.

    ``qrs_width_samples`` is ``None`` when no width counter fired near the
    event. ``rpeak_matched`` is False when the R-peak extractor had no
    candidate near the event and the event's SI peak was used instead.
    """

    r_peak_index: int
    qrs_width_samples: int | None
    rr_interval_samples: int | None
    heart_rate_bpm: float | None
    si_peak_index: int
    rpeak_matched: bool = True


class WidthCounter:
    """QRS width as the rise time of SI from the live threshold to its peak.

    Counting starts on a rising sample above ``thr`` once the hold-off has
    expired and runs while SI stays above ``thr``. The peak is the first
    local maximum of that excursion that comes within 1/8 of the
    excursion's largest value, so a ramp crossing at ``a`` and peaking at
    ``b`` reads ``b - a``. Small humps on the way up (wide lobes give a
    two-humped SI) are skipped, and a flat top with near-equal humps
    resolves to the first one. A zero width is discarded without starting
    the hold-off.
    """

    def __init__(self, holdoff_samples: int = 20):
        self.holdoff_samples = holdoff_samples
        self.counting = False
        self.count = 0
        self.holdoff_until = 0
        self.peak_index: int | None = None  # SI peak behind the width just returned
        self._start = 0
        self._maxima: list[tuple[int, object]] = []
        self._rising = False

    def step(self, si, si_prev, thr, index: int) -> int | None:
        if not self.counting:
            if si > si_prev and si > thr and index >= self.holdoff_until:
                self.counting = True
                self.count = 0
                self._start = index
                self._maxima = []
                self._rising = True
            return None
        if si > si_prev:
            self._rising = True
        elif si < si_prev:
            if self._rising:
                self._maxima.append((index - 1, si_prev))
            self._rising = False
        if si > thr:
            self.count += 1
            return None
        self.counting = False
        self.count = 0
        top = max(v for _, v in self._maxima)
        self.peak_index = next(i for i, v in self._maxima if 8 * v >= 7 * top)
        width = self.peak_index - self._start
        if width == 0:
            return None
        self.holdoff_until = index + self.holdoff_samples
        return width


class RPeakTracker:
    """Local maxima of SI preceded by a sustained non-decreasing run.

    With ``p(n) = si(n) - si(n-1)``, reports ``n - 1`` when ``p(n) <= 0``,
    ``p(n-1) > 0`` and ``p(n-k) >= 0`` for ``k = 1..rise_guard``.
    """

    def __init__(self, rise_guard_samples: int = 50):
        self.rise_guard = rise_guard_samples
        self.p_hist: deque = deque(maxlen=rise_guard_samples)  # p(n-1), p(n-2), ...
        self.prev = None

    def step(self, si, index: int) -> int | None:
        if self.prev is None:
            self.prev = si
            return None
        p = si - self.prev
        self.prev = si
        h = self.p_hist
        hit = (
            len(h) == self.rise_guard
            and p <= 0
            and h[0] > 0
            and all(q >= 0 for q in h)
        )
        h.appendleft(p)
        return index - 1 if hit else None


def rr_and_hr(prev_peak: int, cur_peak: int, fs: float) -> tuple[int, float]:
    if cur_peak <= prev_peak:
        raise FeatureError(f"peak indices must increase: {prev_peak} -> {cur_peak}")
    rr = cur_peak - prev_peak
    return rr, 60.0 * fs / rr


def refine_peak(raw: Sequence[float], index: int, radius: int) -> int:
    """Index of the raw-signal maximum within ``index +/- radius``."""
    lo = max(index - radius, 0)
    hi = min(index + radius + 1, len(raw))
    if lo >= hi:
        return min(max(index, 0), len(raw) - 1)
    seg = np.asarray(raw[lo:hi], dtype=np.float64)
    return lo + int(np.argmax(seg))


def _nearest(items: Sequence[tuple[int, object]], target: int, window: int):
    best = None
    for idx, val in items:
        d = abs(idx - target)
        if d <= window and (best is None or d < best[0]):
            best = (d, idx, val)
    return None if best is None else (best[1], best[2])


def assemble_beats(
    events: Sequence[QrsEvent],
    widths: Sequence[tuple[int, int]],
    rpeaks: Sequence[int],
    fs: float,
    delay: int,
    raw: Sequence[float] | None = None,
    match_window: int = 40,
    refine_radius: int = 12,
) -> list[BeatFeatures]:
    """Pair events with the nearest width / R-peak candidate and derive RR, HR.

    ``widths`` holds ``(si_peak_index, width)`` pairs in the SI timebase.
    R-peak indices are mapped to the raw timebase by subtracting ``delay``
    and, when ``raw`` is given, snapped to the raw maximum nearby.
    """
    beats: list[BeatFeatures] = []
    peak_items = [(int(p), None) for p in rpeaks]
    prev_r: int | None = None
    for ev in events:
        w = _nearest(widths, ev.si_peak_index, match_window)
        pk = _nearest(peak_items, ev.si_peak_index, match_window)
        if w is None:
            log.debug("no QRS width near event at %d", ev.si_peak_index)
        if pk is None:
            log.debug("no R-peak candidate near event at %d", ev.si_peak_index)
        r = (pk[0] if pk is not None else ev.si_peak_index) - delay
        if raw is not None:
            r = refine_peak(raw, r, refine_radius)
        if prev_r is not None and r <= prev_r:
            log.warning("dropping beat at %d: not after previous beat at %d", r, prev_r)
            continue
        rr = hr = None
        if prev_r is not None:
            rr, hr = rr_and_hr(prev_r, r, fs)
        beats.append(
            BeatFeatures(
                r_peak_index=r,
                qrs_width_samples=None if w is None else int(w[1]),
                rr_interval_samples=rr,
                heart_rate_bpm=hr,
                si_peak_index=ev.si_peak_index,
                rpeak_matched=pk is not None,
            )
        )
        prev_r = r
    return beats
