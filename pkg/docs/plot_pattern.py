#!/usr/bin/env python3
"""Plot a pattern.csv produced by `risloc pattern` (dB scale).

Usage: python docs/plot_pattern.py out/pattern.csv [out.png]
"""

import sys

import matplotlib.pyplot as plt
import numpy as np


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "out/pattern.csv"
    data = np.genfromtxt(path, delimiter=",", names=True)
    angles = data["angle_deg"]
    fig, ax = plt.subplots(figsize=(9, 5))
    for name in data.dtype.names[1:]:
        mags = np.asarray(data[name], dtype=float)
        db = 20 * np.log10(np.maximum(mags / max(mags.max(), 1e-300), 1e-6))
        ax.plot(angles, db, lw=1.0, label=name.replace("h", "n="))
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("relative field (dB)")
    ax.set_ylim(-40, 2)
    ax.grid(True, ls=":")
    ax.legend(ncol=3, fontsize=7)
    if len(sys.argv) > 2:
        fig.savefig(sys.argv[2], dpi=150, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
