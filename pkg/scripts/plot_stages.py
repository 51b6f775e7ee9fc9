"""Plot raw ECG, SI with its threshold, R-peaks and QRS widths for an excerpt.

    python scripts/plot_stages.py data/mitdb/100 --start-s 0 --duration-s 10 -o stages.png
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ecg_fxp.config import RunConfig  # noqa: E402
from ecg_fxp.ingest import load_input  # noqa: E402
from ecg_fxp.runner import prepare, run_fixed  # noqa: E402


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("record", type=Path)
    p.add_argument("--start-s", type=float, default=0.0)
    p.add_argument("--duration-s", type=float, default=10.0)
    p.add_argument("-o", "--output", type=Path, default=Path("stages.png"))
    args = p.parse_args()

    cfg = RunConfig()
    rec = prepare(load_input(args.record).excerpt(args.start_s, args.duration_s), cfg)
    run = run_fixed(rec.samples, cfg)
    t = np.arange(len(rec)) / rec.fs
    si = run.taps.real("si")
    thr = np.array([float(v) for v in run.extraction.thr_i]) * cfg.fmt.resolution
    peaks = [b.r_peak_index for b in run.beats]

    fig, ax = plt.subplots(4, 1, sharex=True, figsize=(10, 8))
    ax[0].plot(t, rec.samples, lw=0.8)
    ax[0].set_ylabel("ECG (mV)")
    ax[1].plot(t, si, lw=0.8, label="SI")
    ax[1].plot(t, thr, lw=0.8, ls="--", label="thr_i")
    ax[1].legend(loc="upper right")
    ax[1].set_ylabel("integrator")
    ax[2].plot(t, rec.samples, lw=0.6, color="0.6")
    ax[2].plot(t[peaks], rec.samples[peaks], "rv")
    ax[2].set_ylabel("R-peaks")
    w = [b.qrs_width_samples or 0 for b in run.beats]
    ax[3].stem(t[peaks], np.array(w) / rec.fs * 1e3)
    ax[3].set_ylabel("QRS rise (ms)")
    ax[3].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"{len(peaks)} beats, figure written to {args.output}")


if __name__ == "__main__":
    main()
