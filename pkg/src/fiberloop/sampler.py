"""Photon-counting samples from an MPS by sequential conditional measurement.

Samples are drawn left to right. Right environments of the MPS are computed
once, so each conditional marginal is a local contraction and a full sample
costs O(num_sites * d * chi**2) per draw after an O(num_sites * d * chi**3)
setup, well inside the O(M N**2 d**2 chi**3) envelope of the naive restart.

Randomness: NumPy's PCG64 generator. Samples are produced in fixed chunks of
``CHUNK`` draws; chunk ``c`` uses ``SeedSequence([seed, c])``. The merged
batch therefore depends only on ``(seed, count)`` and not on the number of
worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, ZeroProbabilityError
from .mps import MPS, transfer_left

RNG_NAME = f"numpy.random.PCG64 (numpy {np.__version__})"
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class SampleBatch:
    outcomes: np.ndarray  # (count, measured_sites) integer occupations
    seed: int
    log_probabilities: np.ndarray | None = None
    sites: tuple[int, ...] = ()
    rng: str = RNG_NAME

    def __len__(self) -> int:
        return int(self.outcomes.shape[0])


def _measured_sites(m: MPS, include_loop_sites: bool) -> list[int]:
    return list(range(m.num_sites if include_loop_sites else m.num_bins))


def marginal_distribution(m: MPS, site: int, conditioning: Mapping[int, int] | None = None) -> np.ndarray:
    """p(n_site | conditioning) with unconditioned earlier sites summed out."""
    conditioning = dict(conditioning or {})
    if not 0 <= site < m.num_sites:
        raise DimensionError(f"site {site} outside 0..{m.num_sites - 1}")
    for k, n in conditioning.items():
        if not 0 <= k < site:
            raise DimensionError(f"conditioning site {k} must precede target site {site}")
        if not 0 <= n < m.phys_dims[k]:
            raise DimensionError(f"outcome {n} out of range at site {k}")
    env = np.ones((1, 1), dtype=np.complex128)
    for k in range(site):
        a = m.sites[k]
        if k in conditioning:
            a = a[:, conditioning[k] : conditioning[k] + 1, :]
        env = transfer_left(env, a)
    a = m.sites[site]
    t = np.tensordot(np.tensordot(env, a, axes=([0], [0])), m.right_envs[site + 1], axes=([2], [0]))
    joint = np.einsum("dnc,dnc->n", t, a.conj()).real
    joint = np.clip(joint, 0.0, None)
    total = joint.sum()
    scale = m.norm_squared()
    if total <= 1e-300 or total / scale < 1e-15:
        raise ZeroProbabilityError(f"conditioning event {conditioning} has zero probability")
    return joint / total


def exact_joint_probability(m: MPS, outcome: Sequence[int], include_loop_sites: bool = True) -> float:
    """|<outcome|psi>|**2 / <psi|psi>, summing over loop sites when they are excluded."""
    sites = _measured_sites(m, include_loop_sites)
    if len(outcome) != len(sites):
        raise DimensionError(f"outcome has {len(outcome)} entries, expected {len(sites)}")
    v = np.ones(1, dtype=np.complex128)
    for k, n in zip(sites, outcome):
        n = int(n)
        if not 0 <= n < m.phys_dims[k]:
            return 0.0
        v = v @ m.sites[k][:, n, :]
    env = m.right_envs[len(sites)]
    p = np.einsum("a,ab,b->", v, env, v.conj()).real
    return float(max(p, 0.0) / m.norm_squared())


def exact_joint_probabilities(m: MPS, outcomes: np.ndarray, include_loop_sites: bool = True) -> np.ndarray:
    """Vectorized :func:`exact_joint_probability` over rows of ``outcomes``."""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    sites = _measured_sites(m, include_loop_sites)
    if outcomes.ndim != 2 or outcomes.shape[1] != len(sites):
        raise DimensionError(f"outcomes must have shape (count, {len(sites)})")
    v = np.ones((outcomes.shape[0], 1), dtype=np.complex128)
    for col, k in enumerate(sites):
        a = m.sites[k][:, outcomes[:, col], :]  # (chi_l, count, chi_r)
        v = np.einsum("ma,amb->mb", v, a)
    env = m.right_envs[len(sites)]
    p = np.einsum("ma,ab,mb->m", v, env, v.conj()).real
    return np.clip(p, 0.0, None) / m.norm_squared()


def _draw_chunk(m: MPS, count: int, rng: np.random.Generator, sites: list[int]) -> tuple[np.ndarray, np.ndarray]:
    scale = np.sqrt(m.norm_squared())
    v = np.full((count, 1), 1.0 / scale, dtype=np.complex128)
    out = np.zeros((count, len(sites)), dtype=np.int64)
    logp = np.zeros(count)
    rows = np.arange(count)
    # row-major uniforms: a shorter request is a prefix of a longer one
    uniforms = rng.random((count, len(sites)))
    for col, k in enumerate(sites):
        a = m.sites[k]
        w = np.einsum("ma,anb->mnb", v, a)
        probs = np.einsum("mnb,bc,mnc->mn", w, m.right_envs[k + 1], w.conj()).real
        probs = np.clip(probs, 0.0, None)
        total = probs.sum(axis=1, keepdims=True)
        probs = probs / total
        cdf = np.cumsum(probs, axis=1)
        u = uniforms[:, col : col + 1]
        pick = np.minimum((cdf <= u).sum(axis=1), a.shape[1] - 1)
        # never select an outcome of zero weight because of round-off in the cdf
        while True:
            bad = probs[rows, pick] <= 0.0
            if not bad.any():
                break
            pick[bad] -= 1
        out[:, col] = pick
        p_pick = probs[rows, pick]
        logp += np.log(p_pick)
        v = w[rows, pick, :] / np.sqrt(p_pick * total[:, 0])[:, None]
    return out, logp


def draw_samples(
    m: MPS,
    count: int,
    seed: int,
    include_loop_sites: bool = True,
    threads: int = 1,
) -> SampleBatch:
    """``count`` i.i.d. outcomes of photon counting on every measured site.

    With ``include_loop_sites`` false the loop sites are summed out, never
    measured. Log-probabilities are the chain-rule sums of conditional
    log-probabilities along each sampled path.
    """
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    if seed < 0:
        raise ValueError(f"seed must be an unsigned integer, got {seed}")
    sites = _measured_sites(m, include_loop_sites)
    m.right_envs  # build the shared cache before fanning out
    chunks = [(c, min(CHUNK, count - c * CHUNK)) for c in range((count + CHUNK - 1) // CHUNK)]

    def run(job):
        c, size = job
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, c])))
        return _draw_chunk(m, size, rng, sites)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(job) for job in chunks]
    outcomes = np.concatenate([p[0] for p in parts])
    logp = np.concatenate([p[1] for p in parts])
    return SampleBatch(outcomes=outcomes, seed=int(seed), log_probabilities=logp, sites=tuple(sites))


def empirical_distribution(outcomes: np.ndarray, d: int) -> np.ndarray:
    """Histogram of outcome rows as a dense table of shape (d,) * width."""
    outcomes = np.asarray(outcomes)
    width = outcomes.shape[1]
    flat = np.ravel_multi_index(outcomes.T, (d,) * width)
    counts = np.bincount(flat, minlength=d ** width)
    return (counts / outcomes.shape[0]).reshape((d,) * width)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum())
