#!/usr/bin/env python3
"""Plot sweep.csv from `risloc sweep`: estimated vs true angle with a
perfect-match line and a +-5 degree band.

Usage: python docs/plot_sweep.py out/sweep.csv [out.png]
"""

import sys

import matplotlib.pyplot as plt
import numpy as np


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "out/sweep.csv"
    data = np.genfromtxt(path, delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(data["true_deg"], data["est_deg"], "r.", ms=4, alpha=0.5)
    span = np.array([-90, 90])
    ax.plot(span, span, "g-", lw=1, label="perfect")
    ax.plot(span, span + 5, "y--", lw=1, label="+5 deg")
    ax.plot(span, span - 5, "b--", lw=1, label="-5 deg")
    ax.set_xlabel("true angle (deg)")
    ax.set_ylabel("estimated angle (deg)")
    ax.set_aspect("equal")
    ax.grid(True, ls=":")
    ax.legend()
    if len(sys.argv) > 2:
        fig.savefig(sys.argv[2], dpi=150, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
