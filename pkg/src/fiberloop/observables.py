"""Entanglement, occupation and correlation observables on fiber-loop MPS."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .architecture import ArchitectureSpec
from .errors import DimensionError, ZeroProbabilityError
from .mps import MPS, CanonicalMPS, transfer_left


def entropy_bits(schmidt: np.ndarray) -> float:
    p = np.asarray(schmidt, dtype=float) ** 2
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def entanglement_entropy(c: CanonicalMPS, cut: int) -> float:
    """Base-2 entropy across ``cut`` (first ``cut`` sites vs the rest)."""
    return entropy_bits(c.schmidt_values(cut))


def entropy_profile(c: CanonicalMPS) -> np.ndarray:
    """Entropy for every cut ``1..num_sites-1``."""
    return np.array([entropy_bits(lam) for lam in c.lambdas])


def schmidt_spectrum(c: CanonicalMPS, cut: int) -> np.ndarray:
    return c.schmidt_values(cut).copy()


def thermal_schmidt(n: float, num: int) -> np.ndarray:
    """sqrt(n**k / (n+1)**(k+1)) for k = 0..num-1, the maximal-entropy spectrum."""
    if n < 0:
        raise ValueError(f"mean occupation must be nonnegative, got {n}")
    k = np.arange(num)
    if n == 0:
        return (k == 0).astype(float)
    # log space: n**k overflows long before the weights become negligible
    return np.exp(0.5 * (k * math.log(n) - (k + 1) * math.log1p(n)))


def area_law_bound(n: float) -> float:
    """g(n) = (1+n) log2(1+n) - n log2(n), with g(0) = 0."""
    if n < 0:
        raise ValueError(f"mean occupation must be nonnegative, got {n}")
    if n == 0:
        return 0.0
    return float((1 + n) * math.log2(1 + n) - n * math.log2(n))


def loop_mean_occupation(spec: ArchitectureSpec, i: int) -> float:
    """Mean loop occupation after ``i`` time steps, starting from an empty loop.

    Follows n(i) = cos^2(theta) n(i-1) + sin^2(theta) n_i.
    """
    if spec.kind != "single_loop":
        raise ValueError("the occupation recurrence holds for a single loop only")
    if not 0 <= i <= spec.num_bins:
        raise DimensionError(f"time step {i} outside 0..{spec.num_bins}")
    t = math.cos(spec.couplers[0].theta) ** 2
    n = 0.0
    for k in range(i):
        n = t * n + (1.0 - t) * spec.photons_per_bin[k]
    return n


def loop_occupation_series(spec: ArchitectureSpec) -> np.ndarray:
    """``n(i)`` for ``i = 0..N``."""
    t = math.cos(spec.couplers[0].theta) ** 2
    out = np.zeros(spec.num_bins + 1)
    for k, nk in enumerate(spec.photons_per_bin):
        out[k + 1] = t * out[k] + (1.0 - t) * nk
    return out


def _check_site(m: MPS, site: int) -> None:
    if not 0 <= site < m.num_sites:
        raise DimensionError(f"site {site} outside 0..{m.num_sites - 1}")


def _local_number(d: int) -> np.ndarray:
    return np.arange(d, dtype=float)


def _transfer(env: np.ndarray, a: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Advance a (ket, bra) left environment across one site; ``weights`` is a diagonal operator."""
    if weights is None:
        return transfer_left(env, a)
    return transfer_left(env, a * weights[None, :, None], a)


def expectation_number(m: MPS, site: int) -> float:
    _check_site(m, site)
    a = m.sites[site]
    env = _transfer(m.left_envs[site], a, _local_number(a.shape[1]))
    val = np.einsum("bc,bc->", env, m.right_envs[site + 1])
    return float(val.real / m.norm_squared())


def occupations(m: MPS) -> np.ndarray:
    return np.array([expectation_number(m, k) for k in range(m.num_sites)])


@dataclass(frozen=True)
class TwoPoint:
    raw: float
    C: float
    g2: float | None
    mean_i: float
    mean_j: float


def two_point(m: MPS, i: int, x: int, require_g2: bool = False) -> TwoPoint:
    """<n_i n_{i+x}>, the connected magnitude C and g2 = <n_i n_{i+x}> / <n_i>^2.

    ``g2`` is ``None`` when ``<n_i>`` vanishes unless ``require_g2`` is set,
    in which case :class:`ZeroProbabilityError` is raised.
    """
    j = i + x
    _check_site(m, i)
    _check_site(m, j)
    if x < 1:
        raise DimensionError(f"separation must be >= 1, got {x}")
    nrm = m.norm_squared()
    env = _transfer(m.left_envs[i], m.sites[i], _local_number(m.phys_dims[i]))
    for k in range(i + 1, j):
        env = _transfer(env, m.sites[k])
    env = _transfer(env, m.sites[j], _local_number(m.phys_dims[j]))
    raw = float(np.einsum("bc,bc->", env, m.right_envs[j + 1]).real / nrm)
    ni = expectation_number(m, i)
    nj = expectation_number(m, j)
    if ni <= 1e-300:
        if require_g2:
            raise ZeroProbabilityError(f"<n> vanishes at site {i}; g2 undefined")
        g2 = None
    else:
        g2 = raw / ni ** 2
    return TwoPoint(raw=raw, C=abs(raw - ni * nj), g2=g2, mean_i=ni, mean_j=nj)


def correlation_series(m: MPS, i: int, xs: Iterable[int]) -> list[TwoPoint]:
    """Two-point records for one anchor and many separations in a single sweep."""
    xs = sorted(set(int(x) for x in xs))
    if not xs:
        return []
    _check_site(m, i)
    _check_site(m, i + xs[-1])
    if xs[0] < 1:
        raise DimensionError("separations must be >= 1")
    nrm = m.norm_squared()
    ni = expectation_number(m, i)
    env = _transfer(m.left_envs[i], m.sites[i], _local_number(m.phys_dims[i]))
    out = []
    k = i + 1
    for x in xs:
        j = i + x
        while k < j:
            env = _transfer(env, m.sites[k])
            k += 1
        closed = _transfer(env, m.sites[j], _local_number(m.phys_dims[j]))
        raw = float(np.einsum("bc,bc->", closed, m.right_envs[j + 1]).real / nrm)
        nj = expectation_number(m, j)
        g2 = raw / ni ** 2 if ni > 1e-300 else None
        out.append(TwoPoint(raw=raw, C=abs(raw - ni * nj), g2=g2, mean_i=ni, mean_j=nj))
    return out


@dataclass(frozen=True)
class CorrelationFit:
    zeta_inv: float
    prefactor: float
    residual: float
    num_points: int


def fit_correlation_length(points: Sequence[tuple[float, float]]) -> CorrelationFit:
    """Least-squares line through (x, ln C); C = prefactor * exp(-zeta_inv * x).

    Points with C <= 0 are skipped. ``residual`` is the RMS deviation in ln C.
    """
    usable = [(float(x), float(c)) for x, c in points if c > 0 and np.isfinite(c)]
    if len(usable) < 3:
        raise ValueError(f"need at least 3 points with C > 0, got {len(usable)}")
    x = np.array([p[0] for p in usable])
    y = np.log([p[1] for p in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return CorrelationFit(
        zeta_inv=float(abs(slope)),
        prefactor=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        num_points=len(usable),
    )


def saturation_index(profile: Sequence[float], fraction: float = 0.95) -> int:
    """First cut whose entropy exceeds ``fraction`` of the last value (1-based)."""
    profile = np.asarray(profile)
    target = fraction * profile[-1]
    above = np.nonzero(profile > target)[0]
    return int(above[0]) + 1 if above.size else len(profile)
