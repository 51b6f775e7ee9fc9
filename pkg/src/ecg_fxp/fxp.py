"""Signed fixed-point arithmetic with saturation.

Values are carried as raw two's-complement integers plus a format. Every
operation is exact in integer arithmetic and then saturated, never wrapped.
Quantization rounds to nearest (ties away from zero); multiplies and right
shifts truncate toward negative infinity, like an arithmetic shifter.

The scalar ``FxpValue`` API is what the streaming stages use. The ``*_raw``
helpers and ``quantize_array`` are the same rules on plain ints / numpy
arrays, used by the batch path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FxpError(ValueError):
    """Base class for fixed-point errors."""


class InvalidSampleError(FxpError):
    """Raised when a non-finite value is quantized."""


class FormatMismatchError(FxpError):
    """Raised when two operands of a binary op carry different formats."""


@dataclass(frozen=True)
class FxpFormat:
    word_bits: int = 32
    frac_bits: int = 16

    def __post_init__(self) -> None:
        if not 2 <= self.word_bits <= 64:
            raise FxpError(f"word_bits must be in 2..64, got {self.word_bits}")
        if not 0 <= self.frac_bits <= self.word_bits - 1:
            raise FxpError(
                f"frac_bits must be in 0..{self.word_bits - 1}, got {self.frac_bits}"
            )

    @property
    def min_raw(self) -> int:
        return -(1 << (self.word_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.word_bits - 1)) - 1

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def min_real(self) -> float:
        return self.min_raw * self.resolution

    @property
    def max_real(self) -> float:
        return self.max_raw * self.resolution

    @property
    def numpy_dtype(self) -> type | np.dtype:
        # int64 holds products of two 32-bit raws; wider words fall back to
        # Python ints so nothing silently wraps.
        return np.dtype(np.int64) if self.word_bits <= 32 else object

    def saturate(self, raw: int) -> int:
        if raw > self.max_raw:
            return self.max_raw
        if raw < self.min_raw:
            return self.min_raw
        return raw

    def to_real(self, raw: int) -> float:
        return raw * self.resolution

    def __str__(self) -> str:
        return f"Q{self.word_bits - self.frac_bits}.{self.frac_bits} ({self.word_bits}-bit)"


DEFAULT_FORMAT = FxpFormat(32, 16)


@dataclass(frozen=True)
class FxpValue:
    raw: int
    fmt: FxpFormat = DEFAULT_FORMAT

    def __post_init__(self) -> None:
        if not self.fmt.min_raw <= self.raw <= self.fmt.max_raw:
            raise FxpError(f"raw {self.raw} outside range of {self.fmt}")

    def to_real(self) -> float:
        return self.fmt.to_real(self.raw)

    def __float__(self) -> float:
        return self.to_real()

    def __add__(self, other: FxpValue) -> FxpValue:
        return fxp_add(self, other)

    def __sub__(self, other: FxpValue) -> FxpValue:
        return fxp_sub(self, other)

    def __mul__(self, other: FxpValue) -> FxpValue:
        return fxp_mul(self, other)

    def __rshift__(self, k: int) -> FxpValue:
        return shift_right(self, k)


def from_raw(raw: int, fmt: FxpFormat = DEFAULT_FORMAT) -> FxpValue:
    """Wrap a raw integer, saturating it into range first."""
    return FxpValue(fmt.saturate(int(raw)), fmt)


def quantize_raw(x: float, fmt: FxpFormat) -> int:
    if not math.isfinite(x):
        raise InvalidSampleError(f"cannot quantize non-finite sample {x!r}")
    scaled = abs(x) * (1 << fmt.frac_bits)
    if scaled >= 2.0 ** fmt.word_bits:
        mag = 1 << fmt.word_bits  # saturates below
    else:
        mag = math.floor(scaled + 0.5)
    return fmt.saturate(-mag if x < 0 else mag)


def quantize(x: float, fmt: FxpFormat = DEFAULT_FORMAT) -> FxpValue:
    """Nearest representable value to ``x``, ties away from zero, saturating."""
    return FxpValue(quantize_raw(float(x), fmt), fmt)


def quantize_array(x, fmt: FxpFormat = DEFAULT_FORMAT) -> np.ndarray:
    """Vectorized :func:`quantize`, returning raw integers."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise InvalidSampleError(f"non-finite sample at index {bad}")
    if fmt.word_bits > 32:
        return np.array([quantize_raw(float(v), fmt) for v in x], dtype=object)
    scaled = np.abs(x) * float(1 << fmt.frac_bits)
    mag = np.floor(np.minimum(scaled, 2.0 ** fmt.word_bits) + 0.5)
    raw = np.where(x < 0, -mag, mag)
    return np.clip(raw, fmt.min_raw, fmt.max_raw).astype(np.int64)


def _check(a: FxpValue, b: FxpValue) -> FxpFormat:
    if a.fmt != b.fmt:
        raise FormatMismatchError(f"operand formats differ: {a.fmt} vs {b.fmt}")
    return a.fmt


def fxp_add(a: FxpValue, b: FxpValue) -> FxpValue:
    fmt = _check(a, b)
    return FxpValue(fmt.saturate(a.raw + b.raw), fmt)


def fxp_sub(a: FxpValue, b: FxpValue) -> FxpValue:
    fmt = _check(a, b)
    return FxpValue(fmt.saturate(a.raw - b.raw), fmt)


def mul_raw(a: int, b: int, fmt: FxpFormat) -> int:
    return fmt.saturate((a * b) >> fmt.frac_bits)


def fxp_mul(a: FxpValue, b: FxpValue) -> FxpValue:
    """Full-width product, arithmetic shift back by ``frac_bits``, saturate."""
    fmt = _check(a, b)
    return FxpValue(mul_raw(a.raw, b.raw, fmt), fmt)


def shift_right(a: FxpValue, k: int) -> FxpValue:
    """Arithmetic right shift by ``k`` bits (floor division by 2**k)."""
    if k < 0:
        raise FxpError(f"shift amount must be non-negative, got {k}")
    return FxpValue(a.raw >> k, a.fmt)
