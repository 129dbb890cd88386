"""Render figures from the CSVs written by ``lvtensor rank-scan`` and ``lvtensor bench``.

    python scripts/plot_results.py scan.csv bench_summary.csv ... --out figs/

Needs matplotlib (``pip install .[plot]``).
"""
import argparse
import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_scan(rows, ax):
    groups = defaultdict(list)
    for r in rows:
        if r["rank"] != "NA":
            groups[(r["s"], int(r["d"]))].append(int(r["rank"]))
    for s in sorted({k[0] for k in groups}, key=int):
        ds = sorted(d for ss, d in groups if ss == s)
        ax.plot(ds, [np.median(groups[(s, d)]) for d in ds], "o-", label=f"s={s}")
    ax.set_xlabel("d")
    ax.set_ylabel("median epsilon-rank")
    ax.legend()


def plot_summary(rows, ax):
    kind = rows[0]["kind"]
    x_col = "rank" if kind == "denoise-rank-sweep" else "d"
    series = defaultdict(list)
    for r in rows:
        if not r["metric"].startswith("mse_") or r[x_col] == "NA":
            continue
        label = f"{r['metric']} gamma={r['gamma']}" if kind == "denoise-rank-sweep" else \
            f"{r['metric']} {r['model']} s={r['s']}"
        series[label].append((float(r[x_col]), float(r["mean"]), float(r["se"] or "nan")))
    for label, pts in sorted(series.items()):
        x, m, se = map(np.array, zip(*sorted(pts)))
        ax.errorbar(x, m, yerr=np.nan_to_num(se), marker="o", capsize=2, label=label)
    ax.set_yscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel("MSE")
    ax.set_title(kind)
    ax.legend(fontsize="small")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", default=".")
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for path in args.csv:
        rows = read(path)
        if not rows:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        if "epsilon" in rows[0]:
            plot_scan(rows, ax)
        elif "mean" in rows[0]:
            plot_summary(rows, ax)
        else:
            plt.close(fig)
            print(f"skipping {path}: use a rank-scan CSV or a *_summary.csv")
            continue
        target = os.path.join(args.out, os.path.splitext(os.path.basename(path))[0] + ".png")
        fig.tight_layout()
        fig.savefig(target, dpi=120)
        plt.close(fig)
        print(f"wrote {target}")


if __name__ == "__main__":
    main()
