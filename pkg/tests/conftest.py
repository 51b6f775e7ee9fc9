from pathlib import Path

import numpy as np
import pytest

from ecg_fxp.ingest import read_annotations_csv, read_record, rescale_annotations, resample_to_200

DATA = Path(__file__).resolve().parents[1] / "data" / "mitdb"


def record_200(name: str, start_s: float = 0.0, length_s: float | None = None):
    """MIT-BIH record resampled to 200 Hz plus its annotations on the same grid."""
    rec = read_record(DATA / name)
    ann = read_annotations_csv((DATA / f"{name}_ann.csv").read_text(), rec.fs)
    if length_s is not None:
        a = int(round(start_s * rec.fs))
        ann = ann.window(a, a + int(round(length_s * rec.fs)))
        rec = rec.excerpt(start_s, length_s)
    rec = resample_to_200(rec)
    ann = rescale_annotations(ann, 200.0).window(0, len(rec))
    return rec, ann


@pytest.fixture(scope="session")
def rec100():
    return record_200("100")


@pytest.fixture(scope="session")
def rec100_30s():
    return record_200("100", 0.0, 30.0)


@pytest.fixture(scope="session")
def rec100_10min():
    return record_200("100", 0.0, 600.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# One line per acceptance criterion, filled in by test_acceptance.py and
# echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
