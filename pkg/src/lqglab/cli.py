"""Command-line entry point.

Every stochastic subcommand takes a mandatory --seed and writes byte-stable
artifacts (same config, seed, and thread count give identical bytes); each
run also writes a manifest.json next to the main artifact recording the
config, seed, library version, thread count, and wall time.  The wall-time
field is the one value that varies between reruns.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .rng import rng_stream


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LQGLAB_THREADS", "1")))
    except ValueError:
        return 1


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _manifest(out_path: Path, args: argparse.Namespace, t0: float, extra=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "threads": _threads(),
        "wall_time_s": round(time.time() - t0, 3),
    }
    if extra:
        doc.update(extra)
    _write(out_path.with_suffix(out_path.suffix + ".manifest.json"),
           json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_sample_mullin(args):
    from .mullin import sew_walk_to_refined, extract_tree_map
    from .planar_map import to_text
    from .walks import sample_excursion, MULLIN

    t0 = time.time()
    rng = rng_stream(args.seed)
    walk = sample_excursion(MULLIN, 2 * args.n, (0, 0), (0, 0), rng)
    dec = extract_tree_map(sew_walk_to_refined(walk))
    lines = [to_text(dec.map).rstrip("\n"), f"TREE v1 {len(dec.tree_edges)}"]
    for e in sorted(dec.tree_edges):
        lines.append(str(e))
    out = Path(args.out)
    _write(out, "\n".join(lines) + "\n")
    _manifest(out, args, t0, {"edges": dec.map.n_edges,
                              "vertices": dec.map.n_vertices})
    return 0


def cmd_sample_perc_map(args):
    from .perc_tri import sample_boltzmann_percolated
    from .planar_map import to_text, colors_to_text

    t0 = time.time()
    rng = rng_stream(args.seed)
    p = sample_boltzmann_percolated(args.l, rng)
    out = Path(args.out)
    _write(out, to_text(p.tri.map) + colors_to_text(p.coloring.colors))
    _manifest(out, args, t0, {"vertices": p.tri.map.n_vertices,
                              "perimeter": p.tri.perimeter})
    return 0


def cmd_embed(args):
    from .planar_map import from_text, DiskTriangulation
    from .cardy_smirnov import BoundaryArcs, cardy_smirnov_embed, triangular_disk

    t0 = time.time()
    rng = rng_stream(args.seed)
    if args.infile == "lattice":
        tri, arcs, _ = triangular_disk(args.lattice_side)
    else:
        text = Path(args.infile).read_text()
        tri = DiskTriangulation(from_text(text.split("COLORS")[0]))
        m = tri.map
        h0 = int(np.flatnonzero(m.face_of == tri.outer_face)[0])
        eids = []
        for h in m.face_cycle(h0):
            e = m.edge_id(h)
            if e not in eids:
                eids.append(e)
        if len(eids) < 3:
            from .planar_map import MapError
            raise MapError("map boundary has fewer than three distinct edges")
        k = len(eids)
        arcs = BoundaryArcs(tri, eids[0], eids[k // 3], eids[2 * k // 3])
    emb = cardy_smirnov_embed(tri, arcs, args.samples, rng)
    lines = ["vertex,x,y,z,stderr"]
    for v in range(len(emb.positions)):
        x, y, z = emb.positions[v]
        lines.append(f"{v},{x:.8f},{y:.8f},{z:.8f},{emb.stderr[v]:.8f}")
    out = Path(args.out)
    _write(out, "\n".join(lines) + "\n")
    # sidecar: graph distances from the root vertex, for distance-colored plots
    from .planar_map import bfs_distances
    root_vertex = int(tri.map.origin[tri.map.root])
    dists = bfs_distances(tri.map, root_vertex)
    dlines = ["vertex,dist"] + [f"{v},{int(d)}" for v, d in enumerate(dists)]
    _write(out.with_suffix(out.suffix + ".dist.csv"), "\n".join(dlines) + "\n")
    _manifest(out, args, t0, {"vertices": len(emb.positions),
                              "undefined": int(emb.undefined.sum())})
    return 0


def cmd_gmc(args):
    from .gff import LqgParams, sample_dgff, gmc_area

    t0 = time.time()
    rng = rng_stream(args.seed)
    n = args.grid
    mask = np.ones((n, n), dtype=bool)
    mesh = 1.0 / (n + 1)
    field = sample_dgff(mask, "zero", mesh, rng)
    masses, valid = gmc_area(field, LqgParams(args.gamma), args.eps)
    lines = ["i,j,mass"]
    for i, j in zip(*np.nonzero(valid)):
        lines.append(f"{i},{j},{masses[i, j]:.10e}")
    out = Path(args.out)
    _write(out, "\n".join(lines) + "\n")
    if args.field_out:
        flines = ["i,j,value"]
        for i, j in zip(*np.nonzero(mask)):
            flines.append(f"{i},{j},{field.values[i, j]:.10e}")
        _write(Path(args.field_out), "\n".join(flines) + "\n")
    _manifest(out, args, t0, {"cells": int(valid.sum()),
                              "total_mass": float(masses.sum())})
    return 0


def cmd_mated_crt_dim(args):
    from .exponents import mot_correlation
    from .mated_crt import build_mated_crt, ball_volumes, ball_growth_exponent
    from .walks import sample_correlated_bm

    t0 = time.time()
    rng = rng_stream(args.seed)
    radii = [int(r) for r in args.radii.split(",")]
    rho = mot_correlation(16.0 / (args.gamma ** 2))
    bm = sample_correlated_bm(rho, args.n, 1.0, rng)
    g = build_mated_crt(bm, args.gamma)
    est, se = ball_growth_exponent(g, radii, args.centers, rng)
    lo, hi = int(0.01 * g.n), int(0.99 * g.n)
    vols = np.array([ball_volumes(g, int(c), radii)
                     for c in rng.integers(lo, hi, size=args.centers)])
    lines = ["r,mean_volume,stderr"]
    for k, r in enumerate(radii):
        lines.append(f"{r},{vols[:, k].mean():.4f},"
                     f"{vols[:, k].std(ddof=1) / math.sqrt(len(vols)):.4f}")
    out = Path(args.out)
    _write(out, "\n".join(lines) + "\n")
    _manifest(out, args, t0, {"exponent": est, "exponent_stderr": se,
                              "edges": int(g.indptr[-1] // 2)})
    return 0


def cmd_backbone(args):
    from .exponents import backbone_exponent, backbone_function

    root = backbone_exponent(args.tol)
    doc = {"root": root, "residual": backbone_function(root)}
    print(json.dumps(doc))
    if args.out:
        t0 = time.time()
        out = Path(args.out)
        _write(out, json.dumps(doc) + "\n")
        _manifest(out, args, t0)
    return 0


def cmd_arm_exponents(args):
    from .exponents import arm_exponent_mc

    t0 = time.time()
    rng = rng_stream(args.seed)
    rmax = args.rmax
    radii = [2]
    nxt = 32
    while nxt <= rmax:
        radii.append(nxt)
        nxt *= 2
    if len(radii) < 3:
        radii = [2, max(4, rmax // 2), rmax]
    kind = "one-arm-blue" if args.type == "one" else "two-arm-bichromatic"
    est = arm_exponent_mc(kind, radii, args.trials, rng)
    lines = ["r,R,p_hat,stderr"]
    for (r, r_out), ph, se in zip(est.annuli, est.p_hat, est.p_stderr):
        lines.append(f"{r},{r_out},{ph:.6f},{se:.6f}")
    out = Path(args.out)
    _write(out, "\n".join(lines) + "\n")
    _manifest(out, args, t0, {"exponent": est.exponent,
                              "exponent_stderr": est.stderr})
    return 0


def cmd_walk_stats(args):
    from .walks import (sample_excursion, step_set_by_name, rescaled_to_csv,
                        step_correlation)

    t0 = time.time()
    rng = rng_stream(args.seed)
    s = step_set_by_name(args.stepset)
    start = (args.l, 0) if args.stepset == "kreweras" else (0, 0)
    walk = sample_excursion(s, args.length, start, (0, 0), rng)
    out = Path(args.out)
    _write(out, rescaled_to_csv(walk))
    _manifest(out, args, t0, {"step_correlation": step_correlation(s)})
    return 0


def cmd_charges(args):
    from .exponents import charges_from_gamma, mot_correlation

    ct = charges_from_gamma(args.gamma)
    doc = {"gamma": ct.gamma, "Q": ct.Q, "c_L": ct.c_L, "c_M": ct.c_M,
           "kappa_small": ct.kappa_small, "kappa_large": ct.kappa_large}
    if ct.kappa_large > 4:
        doc["mot_correlation"] = mot_correlation(ct.kappa_large)
    print(json.dumps(doc, sort_keys=True))
    if args.out:
        t0 = time.time()
        out = Path(args.out)
        _write(out, json.dumps(doc, sort_keys=True) + "\n")
        _manifest(out, args, t0)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="lqglab",
                                description="Desk-scale random planar map "
                                            "and Liouville-observable lab")
    sub = p.add_subparsers(dest="command", required=True)

    sm = sub.add_parser("sample-mullin", help="sample a tree-decorated map")
    sm.add_argument("--n", type=int, required=True, help="number of edges")
    sm.add_argument("--seed", type=int, required=True)
    sm.add_argument("--out", required=True)
    sm.set_defaults(func=cmd_sample_mullin)

    sp = sub.add_parser("sample-perc-map",
                        help="Boltzmann percolated triangulation")
    sp.add_argument("--l", type=int, required=True, help="perimeter minus 2")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample_perc_map)

    em = sub.add_parser("embed-cardy-smirnov", help="crossing-event embedding")
    em.add_argument("--in", dest="infile", required=True,
                    help="PMAP file, or 'lattice' for the lattice triangle")
    em.add_argument("--lattice-side", type=int, default=19)
    em.add_argument("--samples", type=int, default=4096)
    em.add_argument("--seed", type=int, required=True)
    em.add_argument("--out", required=True)
    em.set_defaults(func=cmd_embed)

    gm = sub.add_parser("gmc", help="multiplicative-chaos cell measure")
    gm.add_argument("--gamma", type=float, required=True)
    gm.add_argument("--eps", type=float, required=True)
    gm.add_argument("--grid", type=int, required=True)
    gm.add_argument("--seed", type=int, required=True)
    gm.add_argument("--out", required=True)
    gm.add_argument("--field-out", default=None,
                    help="also dump the sampled field as i,j,value CSV")
    gm.set_defaults(func=cmd_gmc)

    mc = sub.add_parser("mated-crt-dim", help="ball-growth exponent")
    mc.add_argument("--gamma", type=float, required=True)
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--radii", default="4,8,16,32")
    mc.add_argument("--centers", type=int, default=25)
    mc.add_argument("--out", required=True)
    mc.set_defaults(func=cmd_mated_crt_dim)

    bb = sub.add_parser("backbone", help="backbone-exponent root")
    bb.add_argument("--tol", type=float, default=1e-12)
    bb.add_argument("--out", default=None)
    bb.set_defaults(func=cmd_backbone)

    ae = sub.add_parser("arm-exponents", help="arm exponents by Monte Carlo")
    ae.add_argument("--type", choices=("one", "two"), required=True)
    ae.add_argument("--rmax", type=int, default=256)
    ae.add_argument("--trials", type=int, default=10000)
    ae.add_argument("--seed", type=int, required=True)
    ae.add_argument("--out", required=True)
    ae.set_defaults(func=cmd_arm_exponents)

    ws = sub.add_parser("walk-stats", help="rescaled walk CSV")
    ws.add_argument("--stepset", choices=("mullin", "kreweras"), required=True)
    ws.add_argument("--length", type=int, required=True)
    ws.add_argument("--l", type=int, default=0)
    ws.add_argument("--seed", type=int, required=True)
    ws.add_argument("--out", required=True)
    ws.set_defaults(func=cmd_walk_stats)

    ch = sub.add_parser("charges", help="central-charge relations")
    ch.add_argument("--gamma", type=float, required=True)
    ch.add_argument("--out", default=None)
    ch.set_defaults(func=cmd_charges)

    return p


def _expand_config(argv):
    """Inline `--config file.json` as flags placed before the user's flags,
    so explicitly given flags win (argparse keeps the last occurrence)."""
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    if "--config" not in argv or not argv:
        return argv
    k = argv.index("--config")
    path = argv[k + 1]
    del argv[k:k + 2]
    doc = json.loads(Path(path).read_text())
    injected = []
    for key, val in sorted(doc.items()):
        injected.extend([f"--{key.replace('_', '-')}", str(val)])
    return argv[:1] + injected + argv[1:]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_expand_config(argv))
    try:
        return args.func(args)
    except Exception as exc:  # machine-readable failure on stderr
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
