"""Run configuration shared by the fixed-point path and the float oracle."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .fxp import FxpFormat

DESIGN_FS = 200.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of the detector and feature extractor.

    Sample counts are at the 200 Hz design rate. ``holdoff_samples`` is the
    width counter's 100 ms self delay, ``rise_guard_samples`` the R-peak
    extractor's "past 50 samples" guard.
    """

    fmt: FxpFormat = field(default_factory=FxpFormat)
    fs: float = DESIGN_FS
    refractory_samples: int = 40
    holdoff_samples: int = 20
    rise_guard_samples: int = 50
    seed_seconds: float = 2.0
    threshold_window_samples: int = 30
    coincidence_samples: int = 40
    warmup_samples: int = 64
    refine_samples: int = 12
    resample: bool = True
    channel: int = 0

    def __post_init__(self) -> None:
        for name in (
            "refractory_samples",
            "holdoff_samples",
            "rise_guard_samples",
            "threshold_window_samples",
            "coincidence_samples",
            "warmup_samples",
            "refine_samples",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.seed_seconds <= 0 or self.fs <= 0:
            raise ConfigError("seed_seconds and fs must be > 0")
        if self.channel not in (0, 1):
            raise ConfigError(f"channel must be 0 or 1, got {self.channel}")

    @property
    def seed_samples(self) -> int:
        return int(round(self.seed_seconds * self.fs))

    def with_format(self, word_bits: int, frac_bits: int) -> RunConfig:
        return replace(self, fmt=FxpFormat(word_bits, frac_bits))


def _coerce(value: str, target):
    if isinstance(target, bool):
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {value!r}")
    if isinstance(target, int):
        return int(value)
    if isinstance(target, float):
        return float(value)
    return value


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment.

    ``word_bits`` and ``frac_bits`` set the fixed-point format; every other
    key must name a :class:`RunConfig` field.
    """
    base = base or RunConfig()
    known = {f.name for f in fields(RunConfig)} - {"fmt"}
    updates: dict = {}
    word, frac = base.fmt.word_bits, base.fmt.frac_bits
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "word_bits":
                word = int(value)
            elif key == "frac_bits":
                frac = int(value)
            elif key in known:
                updates[key] = _coerce(value, getattr(base, key))
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return replace(base, fmt=FxpFormat(word, frac), **updates)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return parse_config_text(Path(path).read_text(), base)
