"""Bit-accurate fixed-point model of a streaming Pan-Tompkins ECG pipeline."""

from .config import RunConfig
from .fxp import FxpFormat, FxpValue, quantize
from .ingest import EcgRecord, AnnotationSet, read_record, synth_beats
from .reference import compare_runs, run_reference
from .runner import run_fixed

__all__ = [
    "AnnotationSet",
    "EcgRecord",
    "FxpFormat",
    "FxpValue",
    "RunConfig",
    "compare_runs",
    "quantize",
    "read_record",
    "run_fixed",
    "run_reference",
    "synth_beats",
]
