"""Acceptance suite: one test per exit criterion, at its stated tolerance.

Each test prints a single summary line so a verbose run reads as a
checklist.  Tolerances are pinned here and nowhere else.
"""

import json
import math

import numpy as np
import pytest

from lqglab.rng import rng_stream

SQRT83 = math.sqrt(8.0 / 3.0)


def report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# -- 1. Mullin bijection, exhaustive ------------------------------------------


def test_acceptance_mullin_exhaustive():
    from lqglab.mullin import (sew_walk_to_refined, extract_tree_map,
                               map_tree_to_walk, decorated_code)
    from lqglab.walks import MULLIN, enumerate_excursions, count_excursions

    cat = [math.comb(2 * k, k) // (k + 1) for k in range(8)]
    for n in range(1, 6):
        walks = enumerate_excursions(MULLIN, 2 * n, (0, 0), (0, 0))
        codes = set()
        for w in walks:
            d = extract_tree_map(sew_walk_to_refined(w))
            assert np.array_equal(map_tree_to_walk(d).steps, w.steps)
            codes.add(decorated_code(d))
        dp = count_excursions(MULLIN, 2 * n, (0, 0), (0, 0))
        assert len(codes) == len(walks) == dp
        assert dp == cat[n] * cat[n + 1]
    assert count_excursions(MULLIN, 2, (0, 0), (0, 0)) == 2
    assert count_excursions(MULLIN, 4, (0, 0), (0, 0)) == 10
    report("mullin exhaustive round-trip + cardinality (len <= 10)", True,
           "counts 2, 10, 70, 588, 5544 = Cat_n*Cat_{n+1}")


# -- 2. Mullin at scale --------------------------------------------------------


def test_acceptance_mullin_scale():
    from lqglab.mullin import (sew_walk_to_refined, extract_tree_map,
                               map_tree_to_walk)
    from lqglab.walks import MULLIN, sample_excursion

    rng = rng_stream(101)
    for _ in range(1000):
        w = sample_excursion(MULLIN, 10_000, (0, 0), (0, 0), rng)
        d = extract_tree_map(sew_walk_to_refined(w))
        assert np.array_equal(map_tree_to_walk(d).steps, w.steps)
    report("mullin round-trip on 10^3 random walks of length 10^4", True)


# -- 3. Percolation sewing -----------------------------------------------------


def test_acceptance_perc_sewing():
    from lqglab.perc_tri import sew_walk_to_percolated, colored_code
    from lqglab.walks import KREWERAS, enumerate_excursions

    total = 0
    for ell in (0, 1, 2):
        codes = set()
        for length in range(1, 10):
            for w in enumerate_excursions(KREWERAS, length, (ell, 0), (0, 0)):
                p = sew_walk_to_percolated(w, ell)  # validates type II
                assert p.tri.perimeter == ell + 2
                codes.add(colored_code(p))
                total += 1
        assert len(codes) == sum(
            1 for length in range(1, 10)
            for _ in enumerate_excursions(KREWERAS, length, (ell, 0), (0, 0)))
    report("percolation sewing injectivity + type II (len <= 9, l in 0..2)",
           True, f"{total} walks, all distinct colored maps")


# -- 4. Step and increment correlations ----------------------------------------


def test_acceptance_correlations():
    from lqglab.walks import (MULLIN, KREWERAS, step_correlation,
                              sample_excursion)

    assert step_correlation(KREWERAS) == 0.5
    assert step_correlation(MULLIN) == 0.0
    # rescaled-increment correlation: per-step products vanish identically
    # (one coordinate moves per step), so correlate mesoscopic block
    # increments of the rescaled path, which is what the Brownian limit sees
    rng = rng_stream(102)
    n2, samples, blocks = 2 ** 14, 1000, 16
    xs, ys = [], []
    for _ in range(samples):
        w = sample_excursion(MULLIN, n2, (0, 0), (0, 0), rng)
        pos = w.positions()[:: n2 // blocks]
        xs.append(np.diff(pos[:, 0]))
        ys.append(np.diff(pos[:, 1]))
    # remove the deterministic excursion arch per block before correlating
    dx = np.asarray(xs, dtype=float)
    dy = np.asarray(ys, dtype=float)
    dx -= dx.mean(axis=0)
    dy -= dy.mean(axis=0)
    corr = float(np.corrcoef(dx.ravel(), dy.ravel())[0, 1])
    sigma = 1.0 / math.sqrt(dx.size)
    ok = abs(corr) < 3 * sigma
    report("kreweras corr = 1/2, mullin corr = 0, block increments within "
           "3 sigma of 0", ok, f"block corr {corr:+.4f} (3 sigma = {3 * sigma:.4f})")


# -- 5. Cardy-Smirnov identity test ---------------------------------------------


def test_acceptance_cardy_identity():
    from lqglab.cardy_smirnov import triangular_disk, cardy_smirnov_embed

    tri, arcs, lattice_pos = triangular_disk(19)  # 210 vertices
    rng = rng_stream(103)
    emb = cardy_smirnov_embed(tri, arcs, 10_000, rng)
    sup = float(np.abs(emb.positions - lattice_pos).max())
    report("cardy-smirnov identity: sup deviation <= 0.05 "
           "(210 vertices, K=10^4)", sup <= 0.05, f"sup = {sup:.4f}")


# -- 6. Crossing events: fast vs oracle -----------------------------------------


def test_acceptance_event_oracle_agreement():
    from itertools import product as iproduct

    from lqglab.cardy_smirnov import (BoundaryArcs, triangular_disk,
                                      event_Ea_oracle, _event_side_all)
    from lqglab.planar_map import SiteColoring, BLUE, YELLOW, canonical_code
    from lqglab.perc_tri import sew_walk_to_percolated
    from lqglab.walks import KREWERAS, enumerate_excursions

    corpus = []
    tri, arcs, _ = triangular_disk(3)  # 10 vertices
    corpus.append((tri, arcs))
    seen = set()
    for ell, maxlen in ((1, 8), (2, 7)):
        for length in range(2, maxlen + 1):
            for w in enumerate_excursions(KREWERAS, length, (ell, 0), (0, 0)):
                p = sew_walk_to_percolated(w, ell)
                code = canonical_code(p.tri.map)
                if code in seen or p.tri.map.n_vertices > 12:
                    continue
                seen.add(code)
                m = p.tri.map
                h0 = int(np.flatnonzero(m.face_of == p.tri.outer_face)[0])
                eids = []
                for h in m.face_cycle(h0):
                    e = m.edge_id(h)
                    if e not in eids:
                        eids.append(e)
                if len(eids) >= 3:
                    corpus.append((p.tri, BoundaryArcs(p.tri, *eids[:3])))
    pairs = 0
    for tri, arcs in corpus:
        interior = tri.interior_vertices()
        base = np.full(tri.map.n_vertices, BLUE, dtype=np.int8)
        for bits in iproduct([BLUE, YELLOW], repeat=len(interior)):
            colors = base.copy()
            for v, b in zip(interior, bits):
                colors[v] = b
            fast = _event_side_all(tri, colors, arcs.arcs[("c", "a")],
                                   arcs.arcs[("a", "b")],
                                   arcs.arcs[("b", "c")], arcs.edges[0])
            oracle = event_Ea_oracle(
                tri, SiteColoring(colors, "monochromatic-blue"), arcs)
            assert np.array_equal(fast, oracle)
            pairs += 1
    report("event fast vs brute-force oracle (maps <= 12 vertices, "
           "all colorings)", True, f"{len(corpus)} maps, {pairs} colorings")


# -- 7. GFF / GMC ----------------------------------------------------------------


def test_acceptance_gff_gmc():
    from lqglab.gff import (GridField, LqgParams, CovarianceOracle,
                            sample_dgff, circle_stencil, gmc_area,
                            gmc_area_mean)

    # covariance within 3 sigma over 10^4 samples
    rng = rng_stream(104)
    mask = np.ones((17, 17), dtype=bool)
    mesh = 1.0 / 18.0
    oracle = CovarianceOracle(mask, "zero")
    a, b = (8, 8), (5, 10)
    exact = oracle.entry(a, b)
    prods = np.empty(10_000)
    for i in range(10_000):
        f = sample_dgff(mask, "zero", mesh, rng)
        prods[i] = f.values[a] * f.values[b]
    se = prods.std(ddof=1) / 100.0
    cov_ok = abs(prods.mean() - exact) < 3 * se

    # circle-average variance: log(1/eps) + const within 2%
    n = 2 ** 9 - 1
    mesh2 = 2.0 ** -9
    field = GridField(mesh2, np.ones((n, n), dtype=bool),
                      np.zeros((n, n)), "zero", (mesh2, mesh2))
    oracle2 = CovarianceOracle(field.mask, "zero")
    eps_list = [2.0 ** -k for k in (3, 4, 5, 6)]
    variances = [oracle2.quad(circle_stencil(field, (0.5, 0.5), e))
                 for e in eps_list]
    logs = [math.log(1 / e) for e in eps_list]
    const = float(np.mean([v - l for v, l in zip(variances, logs)]))
    log_ok = all(abs(v - (l + const)) <= 0.02 * abs(l + const)
                 for v, l in zip(variances, logs))

    # GMC lognormal mean identity at gamma = 0.5 within 3 sigma
    params = LqgParams(0.5)
    f0 = GridField(mesh, mask, np.zeros((17, 17)), "zero", (mesh, mesh))
    eps = 3 * mesh
    target = gmc_area_mean(oracle, f0, params, eps)
    tot = np.empty(2000)
    for i in range(2000):
        f = sample_dgff(mask, "zero", mesh, rng)
        tot[i] = gmc_area(f, params, eps)[0].sum()
    se_g = tot.std(ddof=1) / math.sqrt(len(tot))
    gmc_ok = abs(tot.mean() - target) < 3 * se_g

    report("gff covariance 3 sigma / circle-average log law 2% / "
           "gmc mean identity 3 sigma",
           cov_ok and log_ok and gmc_ok,
           f"cov z={(prods.mean() - exact) / se:+.2f}, "
           f"log max rel err={max(abs(v - (l + const)) / abs(l + const) for v, l in zip(variances, logs)):.4f}, "
           f"gmc z={(tot.mean() - target) / se_g:+.2f}")


# -- 8. Backbone exponent --------------------------------------------------------


def test_acceptance_backbone():
    from lqglab.exponents import (backbone_exponent, backbone_function,
                                  backbone_sign_scan)

    root = backbone_exponent(1e-12)
    resid = abs(backbone_function(root))
    changes = backbone_sign_scan(10_000)
    ok = 0.25 < root < 2 / 3 and resid < 1e-12 and len(changes) == 1
    report("backbone root in (1/4, 2/3), residual < 1e-12, unique sign change",
           ok, f"root = {root:.12f}, residual = {resid:.2e}")


# -- 9. Arm exponents ------------------------------------------------------------


def test_acceptance_arm_exponents():
    from lqglab.exponents import arm_exponent_mc

    radii = [2, 32, 64, 128, 256]
    rng = rng_stream(105)
    one = arm_exponent_mc("one-arm-blue", radii, 10_000, rng)
    ok_one = 0.08 <= one.exponent <= 0.13
    rng2 = rng_stream(106)
    two = arm_exponent_mc("two-arm-bichromatic", radii, 10_000, rng2)
    ok_two = 0.20 <= two.exponent <= 0.30
    report("one-arm in [0.08, 0.13] (target 5/48 ~ 0.104)", ok_one,
           f"{one.exponent:.4f} +- {one.stderr:.4f}")
    report("two-arm bichromatic in [0.20, 0.30] (target 1/4)", ok_two,
           f"{two.exponent:.4f} +- {two.stderr:.4f}")


# -- 10. Mated-CRT ---------------------------------------------------------------


def test_acceptance_mated_crt_oracle():
    from lqglab.mated_crt import (build_mated_crt, brute_force_adjacency,
                                  edge_set)
    from lqglab.walks import sample_correlated_bm

    for seed in range(100):
        rng = rng_stream(5000 + seed)
        n = int(rng.integers(5, 201))
        bm = sample_correlated_bm(0.5, n, 1.0, rng)
        g = build_mated_crt(bm)
        expect = brute_force_adjacency(bm) | {(i, i + 1) for i in range(n - 1)}
        assert edge_set(g) == expect
    report("mated-CRT sweep equals brute-force oracle (n <= 200, 100 seeds)",
           True)


def test_acceptance_mated_crt_dimension():
    from lqglab.exponents import mot_correlation
    from lqglab.mated_crt import build_mated_crt, ball_growth_exponent
    from lqglab.walks import sample_correlated_bm

    rho = mot_correlation(16.0 / SQRT83 ** 2)
    bm = sample_correlated_bm(rho, 10 ** 6, 1.0, rng_stream(107))
    g = build_mated_crt(bm, SQRT83)
    est, se = ball_growth_exponent(g, [12, 16, 24, 32], 100, rng_stream(108))
    ok = 3.3 <= est <= 4.7
    report("gamma=sqrt(8/3) ball-growth estimate in [3.3, 4.7] at n=10^6",
           ok, f"estimate {est:.3f} +- {se:.3f}")


def test_acceptance_mated_crt_monotonicity():
    from lqglab.exponents import mot_correlation
    from lqglab.mated_crt import build_mated_crt, ball_growth_exponent
    from lqglab.walks import sample_correlated_bm

    ests = {}
    for gamma in (0.5, 1.5):
        rho = mot_correlation(16.0 / gamma ** 2)
        slopes = []
        for seed in range(20):
            bm = sample_correlated_bm(rho, 100_000, 1.0, rng_stream(600 + seed))
            g = build_mated_crt(bm, gamma)
            est, _ = ball_growth_exponent(g, [4, 8, 16], 12,
                                          rng_stream(700 + seed))
            slopes.append(est)
        ests[gamma] = np.asarray(slopes)
    diff = ests[1.5].mean() - ests[0.5].mean()
    se = math.sqrt(ests[1.5].var(ddof=1) / 20 + ests[0.5].var(ddof=1) / 20)
    ok = diff > 1.645 * se
    report("ball-growth estimate strictly increasing in gamma (one-sided 95%)",
           ok, f"gamma 0.5: {ests[0.5].mean():.2f}, "
               f"gamma 1.5: {ests[1.5].mean():.2f}, z = {diff / se:.1f}")


# -- 11. Charge relations --------------------------------------------------------


def test_acceptance_charges():
    from lqglab.exponents import charges_from_gamma, gamma_from_cM

    for gamma in np.linspace(0.1, 2.0, 1000):
        charges_from_gamma(float(gamma)).validate(1e-12)
    ok = (abs(gamma_from_cM(0.0) - SQRT83) < 1e-10
          and abs(gamma_from_cM(1.0) - 2.0) < 1e-10)
    report("charge identities to 1e-12 on 10^3-point grid; "
           "gamma(0)=sqrt(8/3), gamma(1)=2", ok)


# -- 12. CLI determinism ---------------------------------------------------------


def test_acceptance_cli_determinism(tmp_path):
    from lqglab.cli import main

    commands = [
        ["sample-mullin", "--n", "5", "--seed", "11"],
        ["sample-perc-map", "--l", "1", "--seed", "11"],
        ["embed-cardy-smirnov", "--in", "lattice", "--lattice-side", "5",
         "--samples", "200", "--seed", "11"],
        ["gmc", "--gamma", "0.5", "--eps", "0.2", "--grid", "9", "--seed", "11"],
        ["mated-crt-dim", "--gamma", "1.0", "--n", "4000", "--seed", "11",
         "--radii", "2,4,8", "--centers", "5"],
        ["backbone", "--tol", "1e-12"],
        ["arm-exponents", "--type", "one", "--rmax", "64", "--trials", "60",
         "--seed", "11"],
        ["walk-stats", "--stepset", "kreweras", "--length", "30", "--l", "0",
         "--seed", "11"],
        ["charges", "--gamma", "1.3"],
    ]
    for k, cmd in enumerate(commands):
        outs = []
        for run in ("x", "y"):
            d = tmp_path / f"{k}{run}"
            d.mkdir()
            full = list(cmd) + ["--out", str(d / "artifact.out")]
            assert main(full) == 0, cmd
            art = (d / "artifact.out").read_bytes()
            man = json.loads((d / "artifact.out.manifest.json").read_text())
            man["wall_time_s"] = 0.0
            man.get("config", {}).pop("out", None)
            outs.append((art, json.dumps(man, sort_keys=True)))
        assert outs[0] == outs[1], f"non-deterministic output for {cmd[0]}"
    report("CLI determinism: byte-identical artifacts across reruns", True,
           f"{len(commands)} subcommands checked")
