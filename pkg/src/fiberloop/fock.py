"""Truncated bosonic operators and passive couplers.

A coupler acts on an ordered mode pair ``(a, b)``. For the loop/time-bin
coupler ``a`` is the loop mode and ``b`` the time-bin mode, and its rank-4
tensor is indexed ``(loop_out, bin_out, loop_in, bin_in)``. Two-mode basis
states are flattened as ``index = n_a * d + n_b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .tensor import expm_antihermitian

# Mode pairs of the tritter, applied left to right.
TRITTER_ORDER = ((0, 1), (1, 2), (0, 2))


@dataclass(frozen=True)
class CouplerSpec:
    """Beam-splitter angles in radians; transmission probability is cos(theta)**2."""

    theta: float
    phi: float = 0.0

    @classmethod
    def from_pi(cls, theta_over_pi: float, phi_over_pi: float = 0.0) -> "CouplerSpec":
        return cls(theta=theta_over_pi * math.pi, phi=phi_over_pi * math.pi)


def check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise DimensionError(f"local dimension d must be an integer >= 2, got {d}")
    return int(d)


def annihilation(d: int) -> np.ndarray:
    d = check_dim(d)
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(np.complex128)


def number(d: int) -> np.ndarray:
    d = check_dim(d)
    return np.diag(np.arange(d, dtype=float)).astype(np.complex128)


def coupler_generator(spec: CouplerSpec, d: int) -> np.ndarray:
    """theta * (a^dag b e^{i phi} - a b^dag e^{-i phi}) on the d**2 two-mode space."""
    a = annihilation(d)
    ad = a.conj().T
    hop = np.kron(ad, a) * np.exp(1j * spec.phi)
    g = spec.theta * (hop - hop.conj().T)
    # remove round-off so the generator is exactly anti-Hermitian
    return 0.5 * (g - g.conj().T)


def coupler_matrix(spec: CouplerSpec, d: int) -> np.ndarray:
    """The d**2 x d**2 unitary of a two-mode coupler.

    The generator conserves n_a + n_b, so each total-photon block is
    exponentiated on its own and entries between blocks are exactly zero.
    """
    g = coupler_generator(spec, d)
    totals = total_photons(d, 2)
    u = np.zeros_like(g)
    for m in range(2 * d - 1):
        idx = np.flatnonzero(totals == m)
        u[np.ix_(idx, idx)] = expm_antihermitian(g[np.ix_(idx, idx)])
    return u


def beam_splitter(spec: CouplerSpec, d: int) -> np.ndarray:
    """Rank-4 coupler tensor ``U[o, p, q, r]`` with (out_a, out_b, in_a, in_b)."""
    d = check_dim(d)
    return coupler_matrix(spec, d).reshape(d, d, d, d)


def embed_two_mode(u: np.ndarray, d: int, num_modes: int, i: int, j: int) -> np.ndarray:
    """Lift a two-mode unitary on modes ``(i, j)`` to the full ``d**num_modes`` space.

    ``u`` acts with mode ``i`` as its first (``a``) mode and ``j`` as its second.
    """
    if i == j or not (0 <= i < num_modes and 0 <= j < num_modes):
        raise DimensionError(f"invalid mode pair ({i}, {j}) for {num_modes} modes")
    u4 = u.reshape(d, d, d, d)
    eye = np.eye(d ** num_modes, dtype=np.complex128).reshape((d,) * num_modes * 2)
    # apply to the output side: out[.., o_i, .., o_j, ..] = sum U[o_i,o_j,q_i,q_j] eye[.., q_i, .., q_j, ..]
    moved = np.moveaxis(eye, (i, j), (0, 1))
    res = np.tensordot(u4, moved, axes=([2, 3], [0, 1]))
    res = np.moveaxis(res, (0, 1), (i, j))
    return res.reshape(d ** num_modes, d ** num_modes)


def tritter_matrix(specs: Sequence[CouplerSpec], d: int) -> np.ndarray:
    """Three-mode unitary: couplers on modes (1,2), (2,3), (1,3), applied in that order."""
    d = check_dim(d)
    if len(specs) != 3:
        raise DimensionError(f"a tritter takes exactly three coupler specs, got {len(specs)}")
    total = np.eye(d ** 3, dtype=np.complex128)
    for spec, (i, j) in zip(specs, TRITTER_ORDER):
        total = embed_two_mode(coupler_matrix(spec, d), d, 3, i, j) @ total
    return total


def tritter(specs: Sequence[CouplerSpec], d: int) -> np.ndarray:
    """Rank-6 tritter tensor indexed (out1, out2, out3, in1, in2, in3)."""
    d = check_dim(d)
    return tritter_matrix(specs, d).reshape((d,) * 6)


def total_photons(d: int, num_modes: int) -> np.ndarray:
    """Photon count of every flattened basis state of ``num_modes`` modes."""
    grids = np.indices((d,) * num_modes).reshape(num_modes, -1)
    return grids.sum(axis=0)
