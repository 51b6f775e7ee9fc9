"""Record input: MIT-BIH format 212, CSV signals/annotations, synthetic beats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class IngestError(ValueError):
    pass


@dataclass
class EcgRecord:
    samples: np.ndarray
    fs: float
    channel_name: str = ""
    source: str = ""
    units: str = "mV"

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.fs <= 0:
            raise IngestError(f"sampling frequency must be positive, got {self.fs}")
        if not np.all(np.isfinite(self.samples)):
            raise IngestError("record contains non-finite samples")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.fs

    def excerpt(self, start_s: float, length_s: float) -> EcgRecord:
        a = int(round(start_s * self.fs))
        b = a + int(round(length_s * self.fs))
        return replace(self, samples=self.samples[a:b], source=f"{self.source}[{a}:{b}]")


@dataclass
class AnnotationSet:
    beat_indices: np.ndarray
    fs: float
    source: str = ""

    def __post_init__(self) -> None:
        self.beat_indices = np.asarray(self.beat_indices, dtype=np.int64)
        if np.any(np.diff(self.beat_indices) <= 0):
            raise IngestError("annotation indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.beat_indices)

    def window(self, start: int, stop: int) -> AnnotationSet:
        """Annotations in ``[start, stop)``, re-based to ``start``."""
        idx = self.beat_indices
        sel = idx[(idx >= start) & (idx < stop)] - start
        return AnnotationSet(sel, self.fs, self.source)


# --- format 212 -------------------------------------------------------------


def decode_212(data: bytes, n_frames: int | None = None) -> np.ndarray:
    """Decode interleaved two-signal format 212 into an ``(n_frames, 2)`` int array.

    Each 3-byte group packs two 12-bit two's-complement samples::

        a = b0 | (b1 & 0x0F) << 8
        b = b2 | (b1 & 0xF0) << 4
    """
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    if n_frames is None:
        n_frames = len(buf) // 3
    need = 3 * n_frames
    if len(buf) < need:
        raise IngestError(
            f"format 212 data truncated at byte offset {len(buf)}: "
            f"{n_frames} frames need {need} bytes"
        )
    triples = buf[:need].reshape(-1, 3).astype(np.int32)
    a = triples[:, 0] | ((triples[:, 1] & 0x0F) << 8)
    b = triples[:, 2] | ((triples[:, 1] & 0xF0) << 4)
    out = np.stack([a, b], axis=1)
    out[out >= 0x800] -= 0x1000
    return out


def encode_212(samples: np.ndarray) -> bytes:
    """Inverse of :func:`decode_212` for an ``(n_frames, 2)`` array of 12-bit values."""
    s = np.asarray(samples, dtype=np.int64)
    if s.ndim != 2 or s.shape[1] != 2:
        raise IngestError(f"expected shape (n, 2), got {s.shape}")
    if s.min(initial=0) < -2048 or s.max(initial=0) > 2047:
        raise IngestError("sample outside 12-bit two's-complement range")
    u = s & 0xFFF
    out = np.empty((len(s), 3), dtype=np.uint8)
    out[:, 0] = u[:, 0] & 0xFF
    out[:, 1] = ((u[:, 0] >> 8) & 0x0F) | ((u[:, 1] >> 4) & 0xF0)
    out[:, 2] = u[:, 1] & 0xFF
    return out.tobytes()


@dataclass
class SignalSpec:
    fmt: str
    gain: float = 200.0
    baseline: int = 0
    description: str = ""


@dataclass
class WfdbHeader:
    record_name: str
    n_signals: int
    fs: float
    n_samples: int | None
    signals: list[SignalSpec] = field(default_factory=list)
    dat_file: str = ""


def parse_header(text: str) -> WfdbHeader:
    """Minimal ``.hea`` parser: fs, and per-signal format, gain, baseline."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise IngestError("empty header")
    rec = lines[0].split()
    if len(rec) < 2:
        raise IngestError(f"malformed record line: {lines[0]!r}")
    name, n_sig = rec[0].split("/")[0], int(rec[1])
    fs = float(rec[2].split("/")[0]) if len(rec) > 2 else 250.0
    n_samples = int(rec[3]) if len(rec) > 3 else None
    signals = []
    dat_file = ""
    for ln in lines[1 : 1 + n_sig]:
        parts = ln.split()
        dat_file = dat_file or parts[0]
        fmt = parts[1].split("x")[0].split(":")[0].split("+")[0]
        gain, baseline = 200.0, 0
        if len(parts) > 2:
            g = parts[2].split("/")[0]
            if "(" in g:
                g, b = g.split("(")
                baseline = int(b.rstrip(")"))
            gain = float(g) or 200.0
            if "(" not in parts[2] and len(parts) > 4:
                baseline = int(parts[4])  # ADC zero stands in for an absent baseline
        signals.append(SignalSpec(fmt, gain, baseline, " ".join(parts[8:])))
    if len(signals) != n_sig:
        raise IngestError(f"header declares {n_sig} signals but lists {len(signals)}")
    return WfdbHeader(name, n_sig, fs, n_samples, signals, dat_file)


def read_212(
    data: bytes,
    channel: int = 0,
    n_samples: int | None = None,
    fs: float = 360.0,
    gain: float | None = None,
    baseline: int = 0,
    channel_name: str = "",
    source: str = "",
) -> EcgRecord:
    """Select one channel of a two-signal format-212 stream.

    With ``gain`` set, samples become ``(adc - baseline) / gain`` (mV);
    otherwise raw ADC units are returned.
    """
    if channel not in (0, 1):
        raise IngestError(f"channel must be 0 or 1, got {channel}")
    adc = decode_212(data, n_samples)[:, channel].astype(np.float64)
    if gain is None:
        return EcgRecord(adc, fs, channel_name, source, units="adc")
    return EcgRecord((adc - baseline) / gain, fs, channel_name, source, units="mV")


def read_record(path: str | Path, channel: int = 0, physical: bool = True) -> EcgRecord:
    """Read ``<path>.hea`` and its format-212 ``.dat`` file."""
    path = Path(path)
    stem = path.with_suffix("") if path.suffix in (".hea", ".dat") else path
    hea = stem.with_suffix(".hea")
    header = parse_header(hea.read_text())
    if channel >= header.n_signals:
        raise IngestError(f"record has {header.n_signals} signals, channel {channel} requested")
    spec = header.signals[channel]
    if spec.fmt != "212" or header.n_signals != 2:
        raise IngestError(f"only two-signal format 212 is supported, got {spec.fmt} x{header.n_signals}")
    data = (hea.parent / header.dat_file).read_bytes()
    return read_212(
        data,
        channel,
        header.n_samples,
        header.fs,
        spec.gain if physical else None,
        spec.baseline,
        spec.description,
        str(stem),
    )


# --- resampling -------------------------------------------------------------

SUPPORTED_RATES = (200.0, 360.0)


def resample_to_200(rec: EcgRecord) -> EcgRecord:
    """Linear interpolation of a 360 Hz record onto the 200 Hz grid."""
    if rec.fs == 200.0:
        return rec
    if rec.fs != 360.0:
        raise IngestError(f"unsupported input rate {rec.fs} Hz; supported: {SUPPORTED_RATES}")
    n_out = math.floor(len(rec) * 200 / 360)
    # output instant k/200 s sits at input position k*360/200 = 9k/5
    pos = np.arange(n_out) * 9 / 5
    out = np.interp(pos, np.arange(len(rec)), rec.samples)
    return replace(rec, samples=out, fs=200.0)


def rescale_annotations(ann: AnnotationSet, fs_out: float = 200.0) -> AnnotationSet:
    if ann.fs == fs_out:
        return ann
    scaled = np.floor(ann.beat_indices * (fs_out / ann.fs) + 0.5).astype(np.int64)
    # collisions can only happen for beats closer than one output sample
    keep = np.concatenate([[True], np.diff(scaled) > 0])
    return AnnotationSet(scaled[keep], fs_out, ann.source)


# --- CSV --------------------------------------------------------------------


def read_csv(text: str, source: str = "") -> EcgRecord:
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith("fs="):
        raise IngestError("line 1: signal CSV must start with 'fs=<value>'")
    try:
        fs = float(lines[0].strip()[3:])
    except ValueError as exc:
        raise IngestError(f"line 1: bad sampling frequency {lines[0]!r}") from exc
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        try:
            v = float(line.split(",")[0])
        except ValueError as exc:
            raise IngestError(f"line {lineno}: cannot parse sample {line!r}") from exc
        if not math.isfinite(v):
            raise IngestError(f"line {lineno}: non-finite sample {line!r}")
        values.append(v)
    return EcgRecord(np.array(values), fs, source=source)


def write_csv(rec: EcgRecord) -> str:
    body = "\n".join(repr(float(v)) for v in rec.samples)
    return f"fs={rec.fs:g}\n{body}\n"


def read_annotations_csv(text: str, fs: float, source: str = "") -> AnnotationSet:
    """One integer sample index per line. An optional ``fs=`` first line overrides ``fs``."""
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line.startswith("fs="):
            fs = float(line[3:])
            continue
        try:
            values.append(int(line.split(",")[0]))
        except ValueError as exc:
            raise IngestError(f"line {lineno}: cannot parse annotation index {line!r}") from exc
        if len(values) > 1 and values[-1] <= values[-2]:
            raise IngestError(f"line {lineno}: annotation indices must be strictly increasing")
    return AnnotationSet(np.array(values, dtype=np.int64), fs, source)


def write_annotations_csv(ann: AnnotationSet) -> str:
    return "".join(f"{int(i)}\n" for i in ann.beat_indices)


# --- synthetic signals ------------------------------------------------------

# 64-bit LCG (Knuth's MMIX constants); the top 53 bits of the state form a
# uniform double in [0, 1).
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
LCG_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int = 0):
        self.state = seed & LCG_MASK

    def next_u64(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & LCG_MASK
        return self.state

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53


def synth_beats(
    fs: float = 200.0,
    bpm: float = 60.0,
    amplitude: float = 1.0,
    qrs_width_ms: float = 100.0,
    duration_s: float = 10.0,
    noise_amplitude: float = 0.0,
    first_beat_s: float = 0.0,
    seed: int = 0,
) -> tuple[EcgRecord, AnnotationSet]:
    """Raised-cosine QRS lobes at exact period ``60 * fs / bpm`` samples.

    Beat k is centred at ``round(first_beat_s * fs + k * period)``, so a
    fractional period is spread over alternating integer spacings. Noise is
    uniform in ``[-noise_amplitude, noise_amplitude)`` from :class:`Lcg64`.
    """
    n = int(round(duration_s * fs))
    period = 60.0 * fs / bpm
    start = first_beat_s * fs
    half = qrs_width_ms * 1e-3 * fs / 2
    centers = []
    k = 0
    while True:
        c = int(math.floor(start + k * period + 0.5))
        if c >= n:
            break
        centers.append(c)
        k += 1
    x = np.zeros(n)
    t = np.arange(n)
    h = max(int(math.ceil(half)), 1)
    for c in centers:
        lo, hi = max(c - h, 0), min(c + h + 1, n)
        d = (t[lo:hi] - c) / half
        lobe = np.where(np.abs(d) < 1, 0.5 * (1 + np.cos(np.pi * d)), 0.0)
        x[lo:hi] += amplitude * lobe
    if noise_amplitude:
        rng = Lcg64(seed)
        x += noise_amplitude * (2 * np.array([rng.uniform() for _ in range(n)]) - 1)
    name = f"synth-{bpm:g}bpm"
    return (
        EcgRecord(x, fs, "synthetic", name),
        AnnotationSet(np.array(centers, dtype=np.int64), fs, name),
    )


def load_input(path: str | Path, channel: int = 0) -> EcgRecord:
    """Dispatch on extension: ``.csv`` signal file or a WFDB record path."""
    path = Path(path)
    if path.suffix == ".csv":
        return read_csv(path.read_text(), source=str(path))
    return read_record(path, channel)
