"""Experiment drivers behind the CLI.

Each study computes plain rows (usable from scripts and tests) and has a
writer that emits a self-describing artifact: comment lines with the package
version and the fully resolved config, then the data.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .architecture import ArchitectureSpec
from .config import RunConfig, STATE_STUDIES
from .errors import ResourceCapError
from .graphs import (
    build_graph,
    cost_estimate,
    num_couplers,
    treewidth_upper_bound,
    write_edge_list,
)
from .mps import MPS, build, canonicalize
from .observables import (
    area_law_bound,
    correlation_series,
    entropy_profile,
    fit_correlation_length,
    loop_occupation_series,
    thermal_schmidt,
)
from .sampler import RNG_NAME, draw_samples


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def header_lines(cfg: RunConfig) -> list[str]:
    return [f"# fiberloop {__version__}", f"# config {cfg.to_json()}"]


def write_csv(path: Path, cfg: RunConfig, columns: list[str], rows: list[tuple]) -> Path:
    lines = header_lines(cfg)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_state(cfg: RunConfig, spec: ArchitectureSpec | None = None) -> MPS:
    return build(spec or cfg.spec(), step_cap=cfg.limits.step_cap)


# ---------------------------------------------------------------- row producers


def entropy_rows(cfg: RunConfig, m: MPS) -> list[tuple]:
    """(i, E(i)) per bin cut; single loops add n(i) and g(n(i))."""
    spec = cfg.spec()
    prof = entropy_profile(canonicalize(m))
    N = spec.num_bins
    if spec.kind == "single_loop":
        occ = loop_occupation_series(spec)
        return [(i, prof[i - 1], occ[i], area_law_bound(occ[i])) for i in range(1, N + 1)]
    return [(i, prof[i - 1]) for i in range(1, N + 1)]


def max_entropy_rows(cfg: RunConfig) -> list[tuple]:
    """(n, E_max, g(n), d) with uniform trains; d = max(fock_dim, 10 n)."""
    rows = []
    for n in cfg.max_entropy_vs_n.photons:
        d = max(cfg.architecture.fock_dim, 10 * n, 2)
        base = cfg.spec(fock_dim=d)
        spec = ArchitectureSpec(
            kind=base.kind,
            photons_per_bin=(n,) * base.num_bins,
            couplers=base.couplers,
            fock_dim=d,
            num_loops=base.num_loops,
            max_bond=base.max_bond,
            svd_tol=base.svd_tol,
        )
        prof = entropy_profile(canonicalize(build_state(cfg, spec)))
        rows.append((n, float(prof[: spec.num_bins].max()), area_law_bound(n), d))
    return rows


def schmidt_cut(cfg: RunConfig) -> int:
    return cfg.schmidt.cut if cfg.schmidt.cut is not None else cfg.architecture.num_bins


def schmidt_rows(cfg: RunConfig, m: MPS) -> list[tuple]:
    """(k, lambda_k, thermal_k); the thermal reference uses the loop mean occupation."""
    spec = cfg.spec()
    cut = schmidt_cut(cfg)
    lam = canonicalize(m).schmidt_values(cut)
    if spec.kind == "single_loop" and cut <= spec.num_bins:
        nbar = loop_occupation_series(spec)[cut]
    else:
        nbar = float(np.mean(spec.photons_per_bin))
    count = min(cfg.schmidt.count, lam.size)
    thermal = thermal_schmidt(nbar, count)
    return [(k, lam[k], thermal[k]) for k in range(count)]


def correlation_anchor(cfg: RunConfig) -> int:
    """1-based anchor bin."""
    if cfg.correlations.anchor is not None:
        return cfg.correlations.anchor
    return cfg.architecture.num_bins - cfg.correlations.max_separation


@dataclass
class CorrelationResult:
    anchor: int
    rows: list[tuple]  # (x, C, g2, raw)
    fit: object | None


def correlation_rows(cfg: RunConfig, m: MPS) -> CorrelationResult:
    anchor = correlation_anchor(cfg)
    xs = range(1, cfg.correlations.max_separation + 1)
    recs = correlation_series(m, anchor - 1, xs)
    rows = [(x, r.C, r.g2 if r.g2 is not None else float("nan"), r.raw) for x, r in zip(xs, recs)]
    try:
        fit = fit_correlation_length([(x, c) for x, c, _, _ in rows])
    except ValueError:
        fit = None
    return CorrelationResult(anchor, rows, fit)


@dataclass
class GraphReport:
    text: str
    summary: dict


def _family_spec(cfg: RunConfig, size: int) -> ArchitectureSpec:
    a = cfg.architecture
    loops = a.num_loops
    if cfg.graph.family_scaling == "square" and a.kind != "single_loop":
        loops = size
    couplers = tuple(c.spec() for c in a.couplers)
    if a.kind in ("loop_tower", "loop_chain"):
        couplers = (couplers * loops)[:loops]
    return ArchitectureSpec(
        kind=a.kind,
        photons_per_bin=(1,) * size,
        couplers=couplers,
        fock_dim=max(a.fock_dim, 2),
        num_loops=loops,
    )


def graph_report(cfg: RunConfig) -> GraphReport:
    spec = cfg.spec()
    tn = build_graph(spec)
    res = treewidth_upper_bound(tn, cfg.graph.heuristic)
    T = num_couplers(tn)
    M = max(spec.total_photons, 1)
    family = []
    for size in cfg.graph.family_sizes:
        g = build_graph(_family_spec(cfg, size))
        family.append((num_couplers(g), treewidth_upper_bound(g, cfg.graph.heuristic).bound))
    square = cfg.graph.family_scaling == "square" and spec.kind != "single_loop"
    if not square or spec.num_loops == spec.num_bins:
        family.append((T, res.bound))  # the instance is itself a member
    est = cost_estimate(T, M, res.bound, family=sorted(set(family)))
    summary = {
        "kind": spec.kind,
        "vertices": tn.num_vertices,
        "edges": tn.num_edges,
        "open_edges": len(tn.open_edges),
        "independent_cycles": tn.num_independent_cycles(),
        "couplers": T,
        "total_photons": M,
        "heuristic": cfg.graph.heuristic,
        "treewidth_bound": res.bound,
        "log_cost": est.log_cost,
        "class": est.cls,
        "family_scaling": cfg.graph.family_scaling,
        "family": family,
    }
    lines = header_lines(cfg)
    for key, val in summary.items():
        val = fmt(val) if isinstance(val, float) else json.dumps(val) if isinstance(val, list) else val
        lines.append(f"# summary {key} = {val}")
    return GraphReport("\n".join(lines) + "\n" + write_edge_list(tn), summary)


# ---------------------------------------------------------------- writers


def write_entropy(cfg: RunConfig, m: MPS, out: Path) -> list[Path]:
    rows = entropy_rows(cfg, m)
    cols = ["i", "E_bits", "loop_mean", "bound_bits"] if len(rows[0]) == 4 else ["i", "E_bits"]
    return [write_csv(out / "entropy_profile.csv", cfg, cols, rows)]


def write_max_entropy(cfg: RunConfig, m: MPS | None, out: Path) -> list[Path]:
    rows = max_entropy_rows(cfg)
    return [write_csv(out / "max_entropy_vs_n.csv", cfg, ["n", "E_max_bits", "bound_bits", "d"], rows)]


def write_schmidt(cfg: RunConfig, m: MPS, out: Path) -> list[Path]:
    rows = schmidt_rows(cfg, m)
    return [write_csv(out / "schmidt.csv", cfg, ["k", "lambda", "thermal"], rows)]


def write_correlations(cfg: RunConfig, m: MPS, out: Path) -> list[Path]:
    res = correlation_rows(cfg, m)
    path = write_csv(out / "correlations.csv", cfg, ["x", "C", "g2", "raw"], res.rows)
    lines = path.read_text(encoding="utf-8").splitlines()
    lines.insert(2, f"# anchor {res.anchor}")
    if res.fit is not None:
        lines.insert(3, f"# fit zeta_inv = {fmt(res.fit.zeta_inv)} prefactor = {fmt(res.fit.prefactor)} "
                        f"residual = {fmt(res.fit.residual)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [path]


def sample_lines(cfg: RunConfig, m: MPS, threads: int = 1) -> list[str]:
    batch = draw_samples(m, cfg.sample_count, cfg.seed, cfg.include_loop_sites, threads=threads)
    head = {
        "type": "header",
        "fiberloop": __version__,
        "rng": RNG_NAME,
        "seed": cfg.seed,
        "count": cfg.sample_count,
        "sites": list(batch.sites),
        "config": cfg.to_dict(),
    }
    lines = [json.dumps(head, sort_keys=True, separators=(",", ":"))]
    for k, (row, lp) in enumerate(zip(batch.outcomes, batch.log_probabilities)):
        outcome = ",".join(str(int(v)) for v in row)
        lines.append(f'{{"seed":{cfg.seed},"index":{k},"outcome":[{outcome}],'
                     f'"probability":{fmt(math.exp(lp))},"log_probability":{fmt(lp)}}}')
    return lines


def write_samples(cfg: RunConfig, m: MPS, out: Path, threads: int = 1) -> list[Path]:
    path = out / "samples.jsonl"
    path.write_text("\n".join(sample_lines(cfg, m, threads)) + "\n", encoding="utf-8")
    return [path]


def write_graph(cfg: RunConfig, out: Path) -> list[Path]:
    path = out / "graph_report.txt"
    path.write_text(graph_report(cfg).text, encoding="utf-8")
    return [path]


def run_studies(cfg: RunConfig, out: Path, studies: tuple[str, ...] | None = None, threads: int = 1) -> list[Path]:
    """Run the requested studies and write one artifact per study into ``out``."""
    studies = tuple(studies if studies is not None else cfg.studies)
    out.mkdir(parents=True, exist_ok=True)
    needs_state = any(s in STATE_STUDIES and s != "max_entropy_vs_n" for s in studies)
    m = build_state(cfg) if needs_state else None
    jobs: dict[str, Callable[[], list[Path]]] = {
        "entropy_profile": lambda: write_entropy(cfg, m, out),
        "max_entropy_vs_n": lambda: write_max_entropy(cfg, m, out),
        "schmidt": lambda: write_schmidt(cfg, m, out),
        "correlations": lambda: write_correlations(cfg, m, out),
        "samples": lambda: write_samples(cfg, m, out, threads),
        "graph_report": lambda: write_graph(cfg, out),
    }
    resolved = out / "resolved_config.json"
    resolved.write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    paths = [resolved]
    if threads > 1 and len(studies) > 1:
        if m is not None:
            m.left_envs, m.right_envs  # fill caches before sharing across threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for res in pool.map(lambda s: jobs[s](), studies):
                paths += res
    else:
        for s in studies:
            paths += jobs[s]()
    return paths


# ---------------------------------------------------------------- convergence


@dataclass
class Rung:
    fock_dim: int
    max_bond: int
    values: dict[str, float]
    max_rel_delta: float | None = None


@dataclass
class ConvergenceReport:
    rungs: list[Rung] = field(default_factory=list)
    converged: bool = False
    converged_rung: int | None = None
    stop_reason: str = ""

    @property
    def final(self) -> dict[str, float]:
        return self.rungs[-1].values if self.rungs else {}


def rung_observables(cfg: RunConfig, m: MPS) -> dict[str, float]:
    """Scalar observables tracked along the convergence ladder."""
    N = cfg.architecture.num_bins
    prof = entropy_profile(canonicalize(m))
    vals = {"E_last": float(prof[N - 1]), "E_max": float(prof[:N].max())}
    if "schmidt" in cfg.studies:
        vals["lambda0"] = float(schmidt_rows(cfg, m)[0][1])
    if "correlations" in cfg.studies:
        res = correlation_rows(cfg, m)
        vals["C1"] = float(res.rows[0][1])
        vals["raw1"] = float(res.rows[0][3])
    return vals


def rel_delta(a: float, b: float, atol: float = 1e-12) -> float:
    scale = max(abs(a), abs(b))
    if scale < atol:
        return 0.0
    return abs(a - b) / scale


def starting_dim(cfg: RunConfig) -> int:
    """d = chi = 10 n for the largest per-bin occupation n (at least 2)."""
    return max(2, 10 * max(cfg.architecture.train()))


def convergence_study(cfg: RunConfig) -> ConvergenceReport:
    """Grow chi by 2x and d by 1.5x until every tracked observable moves < rel_tol."""
    conv = cfg.convergence
    report = ConvergenceReport()
    d = starting_dim(cfg)
    chi = d
    prev = None
    while True:
        if d > conv.max_fock_dim:
            report.stop_reason = f"fock_dim {d} exceeds max_fock_dim {conv.max_fock_dim}"
            break
        if len(report.rungs) >= conv.max_rungs:
            report.stop_reason = f"reached max_rungs {conv.max_rungs}"
            break
        bond = None if cfg.architecture.kind == "single_loop" else chi
        try:
            m = build_state(cfg, cfg.spec(fock_dim=d, max_bond=bond))
        except ResourceCapError as exc:
            report.stop_reason = f"resource cap: {exc}"
            break
        rung = Rung(fock_dim=d, max_bond=d if bond is None else bond, values=rung_observables(cfg, m))
        if prev is not None:
            rung.max_rel_delta = max(rel_delta(rung.values[k], prev.values[k]) for k in rung.values)
        report.rungs.append(rung)
        if rung.max_rel_delta is not None and rung.max_rel_delta < conv.rel_tol:
            report.converged = True
            report.converged_rung = len(report.rungs) - 2
            report.stop_reason = "converged"
            break
        prev = rung
        d = math.ceil(1.5 * d)
        chi = 2 * chi
    return report


def write_convergence(cfg: RunConfig, report: ConvergenceReport, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    keys = list(report.rungs[0].values) if report.rungs else []
    rows = []
    for k, r in enumerate(report.rungs):
        delta = r.max_rel_delta if r.max_rel_delta is not None else float("nan")
        rows.append((k, r.fock_dim, r.max_bond, *[r.values[key] for key in keys], delta))
    path = write_csv(out / "convergence.csv", cfg, ["rung", "d", "chi", *keys, "max_rel_delta"], rows)
    lines = path.read_text(encoding="utf-8").splitlines()
    status = "converged" if report.converged else "unconverged"
    lines.insert(2, f"# status {status} rung {report.converged_rung} reason {report.stop_reason}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [path]


# ---------------------------------------------------------------- oracle cross-check


def oracle_comparison(cfg: RunConfig) -> dict:
    """Max deviations between the MPS route and the dense Fock-space oracle."""
    from .oracle import evolve_dense, exact_distribution
    from .oracle import reduced_entropy
    from .observables import entanglement_entropy, two_point
    from .sampler import exact_joint_probabilities

    spec = cfg.spec()
    m = build_state(cfg)
    dense = evolve_dense(spec, cap=cfg.limits.oracle_cap)
    ref = dense.to_mps_order()
    amp_err = float(np.max(np.abs(m.to_dense(max_entries=cfg.limits.oracle_cap) - ref)))

    c = canonicalize(m)
    L = spec.num_loops
    ent_err = 0.0
    for cut in range(1, m.num_sites):
        # first `cut` MPS sites -> oracle axes (bins before loops in MPS order)
        axes = [L + k if k < spec.num_bins else k - spec.num_bins for k in range(cut)]
        ent_err = max(ent_err, abs(entanglement_entropy(c, cut) - reduced_entropy(dense, axes)))

    table = exact_distribution(dense)
    perm = list(range(L, L + spec.num_bins)) + list(range(L))
    table = np.transpose(table, perm)
    outcomes = np.array(np.unravel_index(np.arange(table.size), table.shape)).T
    prob_err = float(np.max(np.abs(exact_joint_probabilities(m, outcomes) - table.ravel())))

    d = spec.fock_dim
    nvals = np.arange(d)
    corr_err = 0.0
    for i in range(spec.num_bins):
        for j in range(i + 1, spec.num_bins):
            marg = table.sum(axis=tuple(k for k in range(table.ndim) if k not in (i, j)))
            raw = float(np.einsum("a,b,ab->", nvals, nvals, marg))
            corr_err = max(corr_err, abs(two_point(m, i, j - i).raw - raw))
    return {
        "amplitude_max_abs_error": amp_err,
        "entropy_max_abs_error": ent_err,
        "probability_max_abs_error": prob_err,
        "two_point_max_abs_error": corr_err,
        "truncation_error": m.truncation_error,
    }
