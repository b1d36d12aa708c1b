"""Brute-force Fock-space reference simulator for small instances.

The dense state keeps one axis per mode: the ``L`` loop modes first, then
the ``N`` time bins in emission order. This is *not* the MPS site order
(bins first); use :func:`to_mps_order` before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .architecture import ArchitectureSpec
from .errors import DimensionError, ResourceCapError
from .fock import coupler_matrix

DEFAULT_CAP = 2 ** 24


@dataclass(frozen=True, eq=False)
class DenseState:
    amplitudes: np.ndarray  # shape (d,) * (L + N)
    num_loops: int
    num_bins: int

    @property
    def num_modes(self) -> int:
        return self.num_loops + self.num_bins

    @property
    def site_order(self) -> list[str]:
        return [f"loop{k + 1}" for k in range(self.num_loops)] + [f"bin{k + 1}" for k in range(self.num_bins)]

    def to_mps_order(self) -> np.ndarray:
        """Amplitudes with axes reordered to (bins..., loops...)."""
        L = self.num_loops
        perm = list(range(L, self.num_modes)) + list(range(L))
        return np.transpose(self.amplitudes, perm)


def _step_pairs(spec: ArchitectureSpec, step: int) -> list[tuple[int, int, int]]:
    """(coupler index, mode a, mode b) in global mode numbering for one time step."""
    L = spec.num_loops
    b = L + step
    if spec.kind == "single_loop":
        return [(0, 0, b)]
    if spec.kind == "loop_tower":
        # bin <-> loop 1, then loop k <-> loop k+1 with the outer loop as mode a
        return [(0, 0, b)] + [(k, k, k - 1) for k in range(1, L)]
    if spec.kind == "loop_chain":
        # the bin passes loop 1, then loop 2, ...
        return [(k, k, b) for k in range(L)]
    raise ValueError(f"{spec.kind!r} has no dense evolution")


def evolve_dense(spec: ArchitectureSpec, cap: int = DEFAULT_CAP, audit: bool = True) -> DenseState:
    """Apply every coupler of the architecture to the full Fock-space vector."""
    d = spec.fock_dim
    modes = spec.num_loops + spec.num_bins
    size = float(d) ** modes
    if size > cap:
        raise ResourceCapError(f"{d}**{modes} amplitudes exceed the oracle cap {cap}")
    psi = np.zeros((d,) * modes, dtype=np.complex128)
    psi[(0,) * spec.num_loops + tuple(spec.photons_per_bin)] = 1.0
    mats = [coupler_matrix(c, d).reshape(d, d, d, d) for c in spec.couplers]
    for step in range(spec.num_bins):
        for c, i, j in _step_pairs(spec, step):
            psi = np.tensordot(mats[c], psi, axes=([2, 3], [i, j]))
            psi = np.moveaxis(psi, (0, 1), (i, j))
            if audit:
                nrm = np.linalg.norm(psi)
                if abs(nrm - 1.0) > 1e-12:
                    raise ArithmeticError(f"dense evolution lost unitarity: norm {nrm}")
    return DenseState(psi, num_loops=spec.num_loops, num_bins=spec.num_bins)


def exact_distribution(s: DenseState) -> np.ndarray:
    """|amplitude|**2 with the same axes as ``s.amplitudes``."""
    return np.abs(s.amplitudes) ** 2


def bin_distribution(s: DenseState) -> np.ndarray:
    """Joint distribution over time bins only, loops summed out."""
    p = exact_distribution(s)
    return p.sum(axis=tuple(range(s.num_loops))) if s.num_loops else p


def reduced_entropy(s: DenseState, subsystem: Iterable[int]) -> float:
    """von Neumann entropy (bits) of the modes in ``subsystem`` (dense-state axes)."""
    part = sorted(set(int(k) for k in subsystem))
    if any(not 0 <= k < s.num_modes for k in part):
        raise DimensionError(f"subsystem {part} outside 0..{s.num_modes - 1}")
    if not part or len(part) == s.num_modes:
        return 0.0
    rest = [k for k in range(s.num_modes) if k not in part]
    psi = np.transpose(s.amplitudes, part + rest)
    dim = int(np.prod(psi.shape[: len(part)]))
    sv = np.linalg.svd(psi.reshape(dim, -1), compute_uv=False)
    p = sv ** 2
    p = p[p > 1e-300]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def photon_counts(s: DenseState) -> np.ndarray:
    """Total photon number of every basis state, shaped like the amplitudes."""
    return np.indices(s.amplitudes.shape).sum(axis=0)
