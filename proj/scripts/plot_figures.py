#!/usr/bin/env python3
"""Render spdc_forge CSV artifacts (scan.csv, plan_curve.csv, verify_curve.csv) as figures."""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_csv(path):
    """Return (meta dict, header list, float array) for a CSV with '# k=v' comment lines."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row")
    return meta, header, np.array(rows, dtype=float).reshape(-1, len(header))


def log_spaced(v):
    if len(v) < 3 or np.any(v <= 0):
        return False
    steps = np.diff(np.log(v))
    return np.allclose(steps, steps[0], rtol=1e-6) and not np.allclose(np.diff(v), np.diff(v)[0], rtol=1e-6)


def grid(data, header, x_name, y_name, z_name):
    x = np.unique(data[:, header.index(x_name)])
    y = np.unique(data[:, header.index(y_name)])
    z = data[:, header.index(z_name)].reshape(len(x), len(y))
    return x, y, z


def plot_scan(path, out):
    meta, header, data = read_csv(path)
    kind = meta.get("kind", "")
    n_metrics = int(meta.get("metrics", len(header) - 1))
    axes, metrics = header[: len(header) - n_metrics], header[len(header) - n_metrics :]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if len(axes) == 2:
        x, y, z = grid(data, header, axes[0], axes[1], metrics[0])
        mesh = ax.pcolormesh(y, x, z, shading="auto", cmap="viridis")
        if log_spaced(y):
            ax.set_xscale("log")
        if log_spaced(x):
            ax.set_yscale("log")
        ax.set_xlabel(axes[1])
        ax.set_ylabel(axes[0])
        fig.colorbar(mesh, ax=ax, label=metrics[0])
        i, j = np.unravel_index(np.argmax(z), z.shape)
        ax.plot(y[j], x[i], "r+", markersize=12)
    else:
        x = data[:, 0]
        for name in metrics:
            ax.plot(x, data[:, header.index(name)], "o-" if len(x) < 20 else "-", label=name)
        if log_spaced(x):
            ax.set_xscale("log")
        ax.set_xlabel(axes[0])
        ax.legend()
        ax.grid(alpha=0.3)
    ax.set_title(kind)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_curve(path, out):
    _, header, data = read_csv(path)
    d = data[:, header.index("detuning")]
    centre = d[len(d) // 2]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(d - centre, data[:, header.index("target_abs")], "k-", label="target")
    ax.plot(d - centre, data[:, header.index("plan_abs")], "r--", label="domain plan")
    ax.set_xlabel("detuning from quasi-phase matching (rad/um)")
    ax.set_ylabel("|phi| (max-normalized)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", nargs="+", type=Path, help="scan.csv, plan_curve.csv or verify_curve.csv")
    parser.add_argument("--out-dir", type=Path, default=None, help="directory for PNGs (default: next to each CSV)")
    args = parser.parse_args(argv)

    for path in args.csv:
        if args.out_dir:
            # every scan is named scan.csv, so prefix the run directory
            args.out_dir.mkdir(parents=True, exist_ok=True)
            out = args.out_dir / f"{path.resolve().parent.name}-{path.stem}.png"
        else:
            out = path.parent / (path.stem + ".png")
        with open(path) as fh:
            first = next((l for l in fh if not l.startswith("#") and l.strip()), "")
        if first.startswith("detuning"):
            plot_curve(path, out)
        else:
            plot_scan(path, out)
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
