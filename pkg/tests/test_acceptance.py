"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed together in
the terminal summary (see conftest.py).
"""

import itertools
import math
import time

import networkx as nx
import numpy as np
import pytest

from fiberloop.architecture import ArchitectureSpec
from fiberloop.fock import CouplerSpec, coupler_matrix, total_photons, tritter_matrix
from fiberloop.graphs import (
    build_graph,
    classify_family,
    exact_treewidth,
    grid_graph,
    interferometer_example,
    num_couplers,
    treewidth_upper_bound,
    validate,
    width,
)
from fiberloop.mps import build, build_sequential, build_single_loop, canonicalize, fidelity
from fiberloop.observables import (
    area_law_bound,
    correlation_series,
    entanglement_entropy,
    entropy_profile,
    fit_correlation_length,
    loop_occupation_series,
    two_point,
)
from fiberloop.oracle import evolve_dense, exact_distribution, photon_counts, reduced_entropy
from fiberloop.sampler import draw_samples, empirical_distribution, exact_joint_probabilities, total_variation

N_LONG = 300
D_LONG = 16
SATURATED = 200  # bin index (0-based) well past saturation for theta >= 0.1 pi


def single(theta_over_pi, photons, d, phi=0.0):
    return ArchitectureSpec.single_loop(theta_over_pi * math.pi, photons, d, phi=phi)


_states = {}


def long_state(theta_over_pi):
    """(spec, mps, canonical, build seconds); built once and shared by the criteria."""
    if theta_over_pi not in _states:
        start = time.perf_counter()
        spec = single(theta_over_pi, (1,) * N_LONG, D_LONG)
        m = build(spec)
        c = canonicalize(m)
        _states[theta_over_pi] = (spec, m, c, time.perf_counter() - start)
    return _states[theta_over_pi]


def test_criterion_01_area_law(acceptance):
    start = time.perf_counter()
    worst_local = -np.inf
    worst_global = -np.inf
    built = 0.0
    for t in (0.1, 0.25, 0.4):
        spec, _, c, secs = long_state(t)
        built += secs
        n = loop_occupation_series(spec)
        prof = entropy_profile(c)
        for i in range(1, N_LONG + 1):
            worst_local = max(worst_local, prof[i - 1] - area_law_bound(n[i]))
            worst_global = max(worst_global, prof[i - 1] - area_law_bound(1.0))
    elapsed = time.perf_counter() - start + built
    ok = worst_local <= 1e-6 and worst_global <= 1e-6 and elapsed < 120
    acceptance(
        1, ok,
        f"max E(i)-g(n(i)) = {worst_local:.3e}, max E(i)-2 = {worst_global:.3e}, {elapsed:.1f}s",
    )


def test_criterion_02_tightness_small_theta(acceptance):
    start = time.perf_counter()
    _, _, c, built = long_state(0.1)
    e_max = float(entropy_profile(c)[:N_LONG].max())
    elapsed = time.perf_counter() - start + built
    acceptance(2, 1.80 <= e_max <= 2.00 and elapsed < 120, f"E_max = {e_max:.6f} bits in [1.80, 2.00], {elapsed:.1f}s")


@pytest.mark.parametrize("theta", [0.25, 0.1])
def test_criterion_03_correlation_decay(acceptance, theta):
    start = time.perf_counter()
    _, m, _, built = long_state(theta)
    recs = correlation_series(m, SATURATED, range(1, 11))
    fit = fit_correlation_length([(x, r.C) for x, r in zip(range(1, 11), recs)])
    target = -math.log(math.cos(theta * math.pi) ** 2)
    rel = abs(fit.zeta_inv - target) / target
    elapsed = time.perf_counter() - start + built
    acceptance(
        3, rel < 0.05 and elapsed < 120,
        f"theta={theta}pi zeta_inv = {fit.zeta_inv:.6f} vs {target:.6f} (rel {rel:.2e}), {elapsed:.1f}s",
    )


def test_criterion_04_antibunching(acceptance):
    _, m, _, _ = long_state(0.25)
    g2 = two_point(m, SATURATED, 1, require_g2=True).g2
    acceptance(4, g2 < 1 - 1e-6, f"g2(1) = {g2:.6f} < 1 - 1e-6")


def test_criterion_05_thermal_schmidt(acceptance):
    _, _, c, _ = long_state(0.1)
    lam = c.schmidt_values(SATURATED)
    ratios = lam[1:6] / lam[:5]
    target = math.sqrt(0.5)
    lam0_ok = abs(lam[0] - target) / target < 0.05
    decreasing = bool(np.all(np.diff(ratios) < 0))
    near = bool(np.all(np.abs(ratios - target) / target < 0.05))
    acceptance(
        5, lam0_ok and decreasing and near,
        f"lambda0 = {lam[0]:.4f}; ratios k<=4 = {np.array2string(ratios, precision=4)} "
        f"strictly decreasing, within 5% of {target:.4f}",
    )


ANGLE_GRID = [(t, p) for t in (0.05, 0.17, 0.25, 0.4) for p in (0.0, 0.3, 1.1)]


def single_loop_trains():
    for num_bins in range(1, 5):
        for train in itertools.product(range(3), repeat=num_bins):
            for d in range(max(2, max(train) + 1), 6):
                yield train, d


def oracle_deviation(spec):
    m = build(spec)
    dense = evolve_dense(spec)
    ref = dense.to_mps_order()
    psi = m.to_dense()
    amp = np.max(np.abs(psi - ref))

    c = canonicalize(m)
    N = spec.num_bins
    ent = 0.0
    for cut in range(1, N + 1):
        # MPS sites 0..cut-1 are bins 1..cut, dense axes 1..cut
        ent = max(ent, abs(entanglement_entropy(c, cut) - reduced_entropy(dense, range(1, cut + 1))))

    p = np.abs(ref) ** 2
    rows = np.array(list(np.ndindex(p.shape)))
    prob = np.max(np.abs(exact_joint_probabilities(m, rows) - p.ravel()))

    grids = np.indices(p.shape)
    corr = 0.0
    for i in range(N):
        for j in range(i + 1, N + 1):
            raw = np.sum(p * grids[i] * grids[j])
            corr = max(corr, abs(two_point(m, i, j - i).raw - raw))
    return max(amp, ent, prob, corr)


def test_criterion_06_oracle_equivalence(acceptance):
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for train, d in single_loop_trains():
        for t, p in ANGLE_GRID:
            worst = max(worst, oracle_deviation(single(t, train, d, phi=p * math.pi)))
            count += 1
    elapsed = time.perf_counter() - start
    acceptance(
        6, worst < 1e-8 and elapsed < 60,
        f"{count} configs ({len(ANGLE_GRID)} angles), max deviation {worst:.2e} < 1e-8, {elapsed:.1f}s",
    )


def test_criterion_07_sampler(acceptance):
    spec = single(0.25, (1, 1, 1), 4)
    m = build(spec)
    batch = draw_samples(m, 100_000, seed=2024)
    p_oracle = np.abs(evolve_dense(spec).to_mps_order()) ** 2
    tv = total_variation(empirical_distribution(batch.outcomes, 4), p_oracle)
    chain = float(np.max(np.abs(np.exp(batch.log_probabilities) - exact_joint_probabilities(m, batch.outcomes))))
    acceptance(7, tv < 0.02 and chain < 1e-9, f"TV = {tv:.4f} < 0.02, chain-rule max deviation {chain:.2e} < 1e-9")


def test_criterion_08_multi_loop(acceptance):
    worst = 0.0
    for kind in ("loop_tower", "loop_chain"):
        spec = ArchitectureSpec(kind, (1, 1, 1), (CouplerSpec.from_pi(0.25), CouplerSpec.from_pi(0.1, 0.3)), 3, num_loops=2)
        p = np.abs(build_sequential(spec).to_dense()) ** 2
        ref = np.abs(evolve_dense(spec).to_mps_order()) ** 2
        worst = max(worst, float(np.max(np.abs(p - ref))))
    fid = 1.0
    for kind in ("loop_tower", "loop_chain"):
        spec = ArchitectureSpec(kind, (1, 0, 2, 1), (CouplerSpec.from_pi(0.17, 0.2),), 3, num_loops=1)
        loop = ArchitectureSpec("single_loop", (1, 0, 2, 1), (CouplerSpec.from_pi(0.17, 0.2),), 3)
        fid = min(fid, fidelity(build_sequential(spec), build_single_loop(loop)))
    acceptance(
        8, worst < 1e-8 and fid > 1 - 1e-10,
        f"L=2 joint distribution deviation {worst:.2e} < 1e-8; L=1 fidelity 1-{1 - fid:.1e}",
    )


def test_criterion_09_graphs(acceptance):
    checks = {}
    checks["chain bound 1"] = all(treewidth_upper_bound(nx.path_graph(n)).bound == 1 for n in (2, 6, 50))
    checks["cycle bound 2"] = all(treewidth_upper_bound(nx.cycle_graph(n)).bound == 2 for n in (3, 7, 40))
    tn, td = interferometer_example()
    checks["example decomposition width 4"] = validate(td, tn).valid and width(td, tn) == 4
    grid = grid_graph(3, 5)
    checks["3x5 grid bound = exact 3"] = treewidth_upper_bound(grid, "min_fill").bound == exact_treewidth(grid) == 3

    def family(kind, sizes, square):
        pts = []
        for n in sizes:
            loops = n if square else 1
            spec = ArchitectureSpec(kind, (1,) * n, (CouplerSpec(0.3),) * loops, 2, num_loops=loops)
            g = build_graph(spec)
            pts.append((num_couplers(g), treewidth_upper_bound(g).bound))
        return classify_family(pts)

    checks["single loop family tractable"] = family("single_loop", (4, 8, 16, 32, 64), False) == "tractable"
    checks["LxN grid family hard"] = family("loop_chain", (2, 3, 4, 6, 8, 10), True) == "hard"
    failed = [k for k, v in checks.items() if not v]
    acceptance(9, not failed, "all graph checks pass" if not failed else f"failed: {failed}")


def test_criterion_10_property_suites(acceptance):
    rng = np.random.default_rng(10)
    worst = {"fock unitarity": 0.0, "fock conservation": 0.0, "mps norm": 0.0, "mps conservation": 0.0,
             "oracle norm": 0.0, "oracle conservation": 0.0}
    for _ in range(200):
        theta, phi = rng.uniform(-2 * math.pi, 2 * math.pi, 2)
        d = int(rng.integers(2, 7))
        u = coupler_matrix(CouplerSpec(theta, phi), d)
        n2 = total_photons(d, 2)
        worst["fock unitarity"] = max(worst["fock unitarity"], np.max(np.abs(u.conj().T @ u - np.eye(d * d))))
        worst["fock conservation"] = max(worst["fock conservation"], np.max(np.abs(u[n2[:, None] != n2[None, :]])))
        t3 = tritter_matrix([CouplerSpec(*rng.uniform(-math.pi, math.pi, 2)) for _ in range(3)], min(d, 4))
        dd = min(d, 4)
        n3 = total_photons(dd, 3)
        worst["fock unitarity"] = max(worst["fock unitarity"], np.max(np.abs(t3.conj().T @ t3 - np.eye(dd ** 3))))
        worst["fock conservation"] = max(worst["fock conservation"], np.max(np.abs(t3[n3[:, None] != n3[None, :]])))

        kind = ["single_loop", "loop_tower", "loop_chain"][int(rng.integers(3))]
        loops = 1 if kind == "single_loop" else 2
        dm = int(rng.integers(3, 5))
        train = tuple(int(x) for x in rng.integers(0, 3, size=int(rng.integers(1, 4))))
        spec = ArchitectureSpec(
            kind, train, tuple(CouplerSpec(*rng.uniform(-math.pi, math.pi, 2)) for _ in range(loops)), dm, num_loops=loops
        )
        m = build(spec)
        psi = m.to_dense()
        worst["mps norm"] = max(worst["mps norm"], abs(m.norm() - 1))
        counts = np.indices(psi.shape).sum(axis=0)
        worst["mps conservation"] = max(worst["mps conservation"], float(np.max(np.abs(psi[counts != sum(train)]), initial=0)))
        dense = evolve_dense(spec)
        worst["oracle norm"] = max(worst["oracle norm"], abs(exact_distribution(dense).sum() - 1))
        off = np.abs(dense.amplitudes[photon_counts(dense) != sum(train)])
        worst["oracle conservation"] = max(worst["oracle conservation"], float(np.max(off, initial=0)))
    ok = all(v < 1e-10 for v in worst.values())
    acceptance(10, ok, "200 draws; worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
