"""Score the fixed-point path and the float oracle on the bundled MIT-BIH records.

    python scripts/bench_records.py              # full records
    python scripts/bench_records.py --minutes 10
"""

import argparse
import time
from pathlib import Path

from ecg_fxp.config import RunConfig
from ecg_fxp.evaluate import bench
from ecg_fxp.ingest import read_annotations_csv, read_record, rescale_annotations
from ecg_fxp.reference import compare_runs, quantized_input, run_reference
from ecg_fxp.runner import prepare, run_fixed

DATA = Path(__file__).resolve().parents[1] / "data" / "mitdb"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--records", nargs="+", default=["100", "101"])
    p.add_argument("--minutes", type=float, help="only the first N minutes")
    args = p.parse_args()

    cfg = RunConfig()
    print(f"{'record':<7}{'path':<8}{'TP':>6}{'FP':>5}{'FN':>5}{'Se':>9}{'+P':>9}")
    for name in args.records:
        rec = read_record(DATA / name)
        ann = read_annotations_csv((DATA / f"{name}_ann.csv").read_text(), rec.fs)
        if args.minutes:
            ann = ann.window(0, int(args.minutes * 60 * rec.fs))
            rec = rec.excerpt(0.0, args.minutes * 60)
        rec = prepare(rec, cfg)
        ann = rescale_annotations(ann, rec.fs).window(0, len(rec))
        t0 = time.perf_counter()
        fixed = run_fixed(rec.samples, cfg)
        oracle = run_reference(quantized_input(rec.samples, cfg), rec.fs, cfg)
        for label, run in (("fixed", fixed), ("float", oracle)):
            r = bench([b.r_peak_index for b in run.beats], ann.beat_indices)
            print(
                f"{name:<7}{label:<8}{r.true_positives:>6}{r.false_positives:>5}{r.false_negatives:>5}"
                f"{r.sensitivity:>9.4f}{r.positive_predictivity:>9.4f}"
            )
        cmp = compare_runs(fixed, oracle)
        worst = max(cmp.stage_max_abs_dev.values())
        print(
            f"{'':<7}fixed vs float: {len(cmp.matched)} matched, {len(cmp.fixed_only)}/{len(cmp.reference_only)} "
            f"unmatched, max stage dev {worst:.2e} ({time.perf_counter() - t0:.1f} s)"
        )


if __name__ == "__main__":
    main()
