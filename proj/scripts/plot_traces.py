#!/usr/bin/env python3
"""Plot trace curves exported by `etalab heat-trace` (data-driven, batch only).

Usage: plot_traces.py <heat_trace.csv> [out.png]
"""
import csv
import sys


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "heat_trace.png"
    t, theta, dc1, dc2 = [], [], [], []
    with open(path) as f:
        for row in csv.DictReader(f):
            t.append(float(row["t"]))
            theta.append(float(row["theta"]))
            dc1.append(float(row["delta_c_direct"]))
            dc2.append(float(row["delta_c_by_parts"]))
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib unavailable; data summary instead:")
        print(f"  samples: {len(t)}, t in [{t[0]:g}, {t[-1]:g}]")
        print(f"  max |theta| = {max(abs(x) for x in theta):g}")
        print(f"  max |direct - by_parts| = {max(abs(a - b) for a, b in zip(dc1, dc2)):g}")
        return 0
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogx(t, theta)
    ax1.set_xlabel("t")
    ax1.set_ylabel("Theta(t)")
    ax2.semilogx(t, dc1, label="direct")
    ax2.semilogx(t, dc2, "--", label="by parts")
    ax2.set_xlabel("t")
    ax2.set_ylabel("integrated trace defect")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
