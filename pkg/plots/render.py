#!/usr/bin/env python3
"""Render publication-style figures from lqglab CSV artifacts.

Four figure kinds, one per artifact schema:

  embedding   vertex,x,y,z,stderr        scatter inside the triangle outline
  loglog      r,R,p_hat,stderr  (or r,mean_volume,stderr)  decay fit
  walk        t,L,R                       rescaled path traces
  heatmap     i,j,mass                    cell-measure heat map

Stateless batch scripts: every number shown traces to the input artifact;
the only recomputed quantity is the displayed log-log fit line, whose slope
is printed in the legend.  Schema violations exit with status 2 and a
line-numbered message.

Usage: render.py --kind <k> --in <csv>[,<extra csv>] --out <png|svg>
"""

import argparse
import json
import math
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

TRIANGLE_2D = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2],
                        [0.0, 0.0]])


class SchemaError(Exception):
    pass


def read_csv(path, columns):
    """Parse a comma-separated artifact, enforcing the given header."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}:1: empty file")
    header = lines[0].strip()
    if header != columns:
        raise SchemaError(f"{path}:1: expected header {columns!r}, "
                          f"got {header!r}")
    ncol = len(columns.split(","))
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != ncol:
            raise SchemaError(f"{path}:{k}: expected {ncol} fields, "
                              f"got {len(parts)}")
        try:
            rows.append([float(x) for x in parts])
        except ValueError as exc:
            raise SchemaError(f"{path}:{k}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}:2: no data rows")
    return np.asarray(rows)


def bary_to_xy(bary):
    corners = TRIANGLE_2D[:3]
    return bary @ corners


def render_embedding(paths, out):
    data = read_csv(paths[0], "vertex,x,y,z,stderr")
    pts = bary_to_xy(data[:, 1:4])
    if len(paths) > 1:
        dist = read_csv(paths[1], "vertex,dist")
        color = dist[np.argsort(dist[:, 0]), 1][data[:, 0].astype(int)]
        label = "graph distance from root"
    else:
        color = data[:, 4]
        label = "standard error"
    fig, ax = plt.subplots(figsize=(6, 5.5))
    ax.plot(TRIANGLE_2D[:, 0], TRIANGLE_2D[:, 1], "k-", lw=1.2)
    sc = ax.scatter(pts[:, 0], pts[:, 1], c=color, cmap="viridis", s=22,
                    edgecolors="none")
    fig.colorbar(sc, ax=ax, label=label)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title("crossing-probability embedding")
    fig.savefig(out, dpi=150, bbox_inches="tight")


def render_loglog(paths, out):
    """Decay plot with error bars and the fitted power law in the legend."""
    try:
        data = read_csv(paths[0], "r,R,p_hat,stderr")
        x = data[:, 1] / data[:, 0]
        y = data[:, 2]
        yerr = data[:, 3]
        xlabel, ylabel = "R / r", "crossing probability"
        sign = -1.0
    except SchemaError:
        data = read_csv(paths[0], "r,mean_volume,stderr")
        x = data[:, 0]
        y = data[:, 1]
        yerr = data[:, 2]
        xlabel, ylabel = "radius r", "mean ball volume"
        sign = 1.0
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(x, y, yerr=yerr, fmt="o", capsize=3, label="measured")
    xs = np.linspace(x.min(), x.max(), 200)
    ax.plot(xs, np.exp(intercept) * xs ** slope, "--",
            label=f"fit slope = {sign * slope:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    return sign * slope


def render_walk(paths, out):
    data = read_csv(paths[0], "t,L,R")
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(data[:, 0], data[:, 1], lw=0.9, label="L")
    ax.plot(data[:, 0], data[:, 2], lw=0.9, label="R")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("rescaled time")
    ax.set_ylabel("rescaled height")
    ax.legend()
    fig.savefig(out, dpi=150, bbox_inches="tight")


def render_heatmap(paths, out):
    data = read_csv(paths[0], "i,j,mass")
    ii = data[:, 0].astype(int)
    jj = data[:, 1].astype(int)
    grid = np.full((ii.max() + 1, jj.max() + 1), np.nan)
    grid[ii, jj] = data[:, 2]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(grid, origin="lower", cmap="magma")
    fig.colorbar(im, ax=ax, label="cell mass")
    ax.set_xlabel("j")
    ax.set_ylabel("i")
    ax.set_title("multiplicative-chaos cell measure")
    fig.savefig(out, dpi=150, bbox_inches="tight")


KINDS = {
    "embedding": render_embedding,
    "loglog": render_loglog,
    "walk": render_walk,
    "heatmap": render_heatmap,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=sorted(KINDS), required=True)
    parser.add_argument("--in", dest="inputs", required=True,
                        help="input CSV (comma-separate an optional extra)")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    args = parser.parse_args(argv)
    paths = args.inputs.split(",")
    try:
        slope = KINDS[args.kind](paths, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    if args.kind == "loglog" and slope is not None:
        print(json.dumps({"fit_slope": round(float(slope), 6)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
