#!/usr/bin/env python3
"""Plot a trajectory CSV written by `ptime`.

Top panel: states x1..xn (symlog). Middle: kappa. Bottom, when present:
the signal y and its true derivative.

    python3 tools/plot_csv.py out/example1.csv -o example1.png
"""
import argparse
import csv
import sys


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0][0] != "t":
        sys.exit(f"{path}: not a ptime trajectory CSV")
    header = rows[0]
    cols = {name: [float(r[i]) for r in rows[1:]] for i, name in enumerate(header)}
    return header, cols


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", help="image file; shows a window when omitted")
    ap.add_argument("--tmax", type=float, help="clip the time axis")
    ap.add_argument("--linthresh", type=float, default=1e-3, help="linear range of the symlog state axis")
    args = ap.parse_args()

    import matplotlib

    if args.output:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, cols = load(args.csv)
    t = cols["t"]
    states = [h for h in header if h.startswith("x")]
    signal = [h for h in ("y", "dy_true") if h in cols]

    panels = 3 if signal else 2
    fig, axes = plt.subplots(panels, 1, sharex=True, figsize=(8, 2.6 * panels))
    for name in states:
        axes[0].plot(t, cols[name], label=name, lw=1)
    axes[0].set_yscale("symlog", linthresh=args.linthresh)
    axes[0].set_ylabel("state")
    axes[0].legend(loc="upper right")
    axes[1].plot(t, cols["kappa"], color="k", lw=1)
    axes[1].set_yscale("log")
    axes[1].set_ylabel("kappa")
    if signal:
        for name in signal:
            axes[2].plot(t, cols[name], label=name, lw=1)
        axes[2].legend(loc="upper right")
    axes[-1].set_xlabel("t")
    if args.tmax is not None:
        axes[-1].set_xlim(t[0], args.tmax)
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
