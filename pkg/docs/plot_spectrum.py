#!/usr/bin/env python3
"""Plot spectrum.csv (+ optional harmonics.csv markers) from `risloc simulate`.

Usage: python docs/plot_spectrum.py out/spectrum.csv [out/harmonics.csv] [out.png]
"""

import sys

import matplotlib.pyplot as plt
import numpy as np


def main():
    spec_path = sys.argv[1] if len(sys.argv) > 1 else "out/spectrum.csv"
    data = np.genfromtxt(spec_path, delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(data["freq_hz"], data["magnitude"], lw=0.8)
    if len(sys.argv) > 2 and sys.argv[2].endswith(".csv"):
        marks = np.genfromtxt(sys.argv[2], delimiter=",", names=True)
        ax.plot(marks["freq_hz"], marks["magnitude"], "ro", ms=4, mfc="none")
    ax.set_xlabel("frequency offset (Hz)")
    ax.set_ylabel("magnitude")
    ax.grid(True, ls=":")
    out = [a for a in sys.argv[2:] if a.endswith(".png")]
    if out:
        fig.savefig(out[0], dpi=150, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
