#!/usr/bin/env python3
"""Plot ptrlab CSV artifacts.

Usage:
    plot_csv.py spectrum.csv [more.csv ...] [--out fig.png] [--logy-loss]

Picks sensible axes from the header: transmission spectra (k, T_N), field
profiles (x, abs_psi), shift tables, sweep tables (epsilon vs 1 - T) and
eigenvalue traces (epsilon vs re/im k).
"""

import argparse
import csv
import sys

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    header, data = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                cols[name].append(float("nan"))
    return header, cols


def plot_file(ax, path, logy_loss):
    header, cols = load(path)
    label = path.rsplit("/", 1)[-1]
    if header[:2] == ["k", "T_N"]:
        ax.plot(cols["k"], cols["T_N"], label=label)
        ax.set_xlabel("k d")
        ax.set_ylabel("$T_N$")
    elif header[0] == "x":
        ax.plot(cols["x"], cols["abs_psi"], label=label)
        ax.set_xlabel("x / d")
        ax.set_ylabel(r"$|\psi|$")
    elif header[0] == "epsilon" and "one_minus_T" in header:
        if logy_loss:
            ax.loglog(cols["epsilon"], cols["one_minus_T"], "o-", label=label)
            ax.set_ylabel("$1 - T$")
        else:
            ax.plot(cols["epsilon"], cols["peak_T"], "o-", label=label)
            ax.set_ylabel("peak $T$")
        ax.set_xlabel(r"$\varepsilon$")
    elif header[0] == "epsilon" and "re_ka" in header:
        ax.plot(cols["epsilon"], cols["re_ka"], label=f"{label} Re $k_a$")
        ax.plot(cols["epsilon"], cols["re_kb"], label=f"{label} Re $k_b$")
        ax.plot(cols["epsilon"], cols["im_ka"], "--", label=f"{label} Im $k_a$")
        ax.plot(cols["epsilon"], cols["im_kb"], "--", label=f"{label} Im $k_b$")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel("k d")
    elif header[0] == "n":
        ax.stem(cols["n"], cols["im_k1"], label=label)
        ax.set_xlabel("resonance number n")
        ax.set_ylabel(r"Im $k_1$")
    elif header[0] == "re_k":
        ax.scatter(cols["re_k"], cols["im_k"], label=label)
        ax.set_xlabel("Re k d")
        ax.set_ylabel("Im k d")
    else:
        print(f"{path}: unrecognized header {header}", file=sys.stderr)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csvs", nargs="+")
    parser.add_argument("--out", help="write the figure instead of showing it")
    parser.add_argument(
        "--logy-loss",
        action="store_true",
        help="sweep tables: plot 1 - T on log-log axes",
    )
    args = parser.parse_args()

    fig, ax = plt.subplots(figsize=(7, 4))
    for path in args.csvs:
        plot_file(ax, path, args.logy_loss)
    ax.legend(fontsize=8)
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=160)
    else:
        plt.show()


if __name__ == "__main__":
    main()
