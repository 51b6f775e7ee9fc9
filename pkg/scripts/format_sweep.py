"""Sweep word / fraction lengths and report stage error and detection quality.

Shows where the datapath starts to lose beats as the word narrows, e.g.
towards an 18-bit DSP-slice operand.

    python scripts/format_sweep.py --minutes 5
"""

import argparse
from pathlib import Path

from ecg_fxp.config import RunConfig
from ecg_fxp.evaluate import bench
from ecg_fxp.ingest import read_annotations_csv, read_record, rescale_annotations
from ecg_fxp.reference import compare_runs, quantized_input, run_reference
from ecg_fxp.runner import prepare, run_fixed

DATA = Path(__file__).resolve().parents[1] / "data" / "mitdb"

FORMATS = [(32, 16), (28, 14), (24, 12), (24, 10), (20, 10), (18, 8), (18, 6), (16, 6), (14, 4)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--record", default="100")
    p.add_argument("--minutes", type=float, default=5.0)
    args = p.parse_args()

    rec = read_record(DATA / args.record).excerpt(0.0, args.minutes * 60)
    ann = read_annotations_csv((DATA / f"{args.record}_ann.csv").read_text(), 360.0)
    ann = ann.window(0, len(rec))
    base = RunConfig()
    rec = prepare(rec, base)
    ann = rescale_annotations(ann, rec.fs).window(0, len(rec))

    print(f"{'format':<10}{'max dev sf':>12}{'max dev si':>12}{'Se':>8}{'+P':>8}{'agree':>7}")
    for word, frac in FORMATS:
        cfg = base.with_format(word, frac)
        fixed = run_fixed(rec.samples, cfg)
        oracle = run_reference(quantized_input(rec.samples, cfg), rec.fs, cfg)
        cmp = compare_runs(fixed, oracle)
        r = bench([b.r_peak_index for b in fixed.beats], ann.beat_indices)
        dev = cmp.stage_max_abs_dev
        print(
            f"{word}/{frac:<7}{dev['sf']:>12.2e}{dev['si']:>12.2e}"
            f"{r.sensitivity:>8.4f}{r.positive_predictivity:>8.4f}{str(cmp.beats_agree):>7}"
        )


if __name__ == "__main__":
    main()
