"""Beat matching and sensitivity / positive predictivity scoring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


def match_indices(a: Iterable[int], b: Iterable[int], tolerance: int):
    """Greedy one-to-one matching of two index sets within ``tolerance``.

    Walks ``a`` in order and pairs each element with the nearest unused
    element of ``b``. Returns ``(pairs, unmatched_a, unmatched_b)``.
    """
    a = sorted(int(v) for v in a)
    b = sorted(int(v) for v in b)
    pairs: list[tuple[int, int]] = []
    used = [False] * len(b)
    unmatched_a: list[int] = []
    j0 = 0
    for x in a:
        while j0 < len(b) and b[j0] < x - tolerance:
            j0 += 1
        best = None
        j = j0
        while j < len(b) and b[j] <= x + tolerance:
            if not used[j] and (best is None or abs(b[j] - x) < abs(b[best] - x)):
                best = j
            j += 1
        if best is None:
            unmatched_a.append(x)
        else:
            used[best] = True
            pairs.append((x, b[best]))
    unmatched_b = [v for v, u in zip(b, used) if not u]
    return pairs, unmatched_a, unmatched_b


@dataclass(frozen=True)
class BenchReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    match_window_samples: int

    @property
    def sensitivity(self) -> float:
        n = self.true_positives + self.false_negatives
        return self.true_positives / n if n else 1.0

    @property
    def positive_predictivity(self) -> float:
        n = self.true_positives + self.false_positives
        return self.true_positives / n if n else 1.0

    def passes(self, min_sensitivity: float, min_ppv: float) -> bool:
        return self.sensitivity >= min_sensitivity and self.positive_predictivity >= min_ppv

    def summary(self) -> str:
        return (
            f"TP={self.true_positives} FP={self.false_positives} FN={self.false_negatives} "
            f"Se={self.sensitivity:.4f} +P={self.positive_predictivity:.4f} "
            f"(match window +/-{self.match_window_samples} samples)"
        )


def bench(detected: Iterable[int], annotated: Iterable[int], window: int = 30) -> BenchReport:
    pairs, fp, fn = match_indices(detected, annotated, window)
    return BenchReport(len(pairs), len(fp), len(fn), window)
