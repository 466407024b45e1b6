"""Free-energy and Schrödinger phase diagrams as CSV, plus PNGs if matplotlib is installed.

    python scripts/make_phase_diagrams.py --out results/phase --step 0.05
"""

import argparse
from pathlib import Path

from loglab.inequalities import BOUNDED, UNBOUNDED, UNKNOWN, scan_phase_diagram
from loglab.io import RunConfig, write_csv

CODES = {BOUNDED: 0, UNKNOWN: 1, UNBOUNDED: 2}


def _write(path, scan, xname, yname, config):
    rows = [(x, y, lab.label, lab.reason) for x, y, lab in scan.rows()]
    return write_csv(path, [xname, yname, "label", "reason"], rows, config)


def _plot(path, scan, xname, yname, title):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    z = np.array([[CODES[lab.label] for lab in row] for row in scan.labels]).T
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.pcolormesh(scan.xs, scan.ys, z, cmap="Greys", vmin=0, vmax=2, shading="nearest")
    ax.set_xlabel(xname)
    ax.set_ylabel(yname)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/phase")
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--no-plot", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    s = args.step
    fe = scan_phase_diagram("free_energy", f"-1:3:{s}", f"-3:3:{s}")
    cfg = RunConfig("phase", {"which": "free-energy", "step": s})
    _write(out / "free_energy.csv", fe, "a", "b", cfg)
    panels = [("free_energy", fe, "a", "b", "F_{a,b}")]
    for alpha in (0.0, 1.0):
        sc = scan_phase_diagram("schrodinger", f"-3:3:{s}", f"-3:3:{s}", alpha=alpha)
        cfg = RunConfig("phase", {"which": "schrodinger", "alpha": alpha, "step": s})
        _write(out / f"schrodinger_alpha{alpha:g}.csv", sc, "gamma", "Mbeta", cfg)
        panels.append((f"schrodinger_alpha{alpha:g}", sc, "gamma", "M beta", f"alpha = {alpha:g}"))
    if not args.no_plot:
        try:
            for name, scan, xn, yn, title in panels:
                _plot(out / f"{name}.png", scan, xn, yn, title)
        except ImportError:
            print("matplotlib not installed; CSV only")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
