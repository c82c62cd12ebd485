"""Plot the error curves written by `bura figure1`.

usage: python3 scripts/plot_figure1.py target/bura/figure1/figure1.csv [figure1.png]
"""

import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main() -> None:
    src = sys.argv[1] if len(sys.argv) > 1 else "target/bura/figure1/figure1.csv"
    dst = sys.argv[2] if len(sys.argv) > 2 else "figure1.png"
    curves = defaultdict(lambda: ([], [], []))
    with open(src, newline="") as fh:
        for row in csv.DictReader(fh):
            z, full, reduced = curves[row["delta"]]
            z.append(float(row["z"]))
            full.append(float(row["bura_error"]))
            reduced.append(float(row["rsbura_error"]))
    fig, axes = plt.subplots(1, len(curves), figsize=(5 * len(curves), 4), squeeze=False)
    for ax, (delta, (z, full, reduced)) in zip(axes[0], sorted(curves.items(), key=lambda kv: -float(kv[0]))):
        ax.semilogx(z, full, color="tab:blue", label="BURA")
        ax.semilogx(z, reduced, color="gold", label="RS-BURA")
        ax.set_title(f"delta = {delta}")
        ax.set_xlabel("z")
        ax.legend()
    axes[0][0].set_ylabel("r(z) - z^-alpha")
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main()
