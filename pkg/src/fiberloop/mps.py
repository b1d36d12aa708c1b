"""Matrix product states generated by fiber-loop architectures.

Sites are 0-based and ordered: output time bins ``0 .. N-1`` (emission order)
followed by the final loop modes ``N .. N+L-1``. Every site tensor has
extents ``(left_bond, physical, right_bond)`` and the outer bonds are 1.
Cut ``i`` is the bond between sites ``i-1`` and ``i``, i.e. it separates the
first ``i`` sites from the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .architecture import ArchitectureSpec
from .errors import DimensionError, ResourceCapError, ZeroNormError
from .fock import beam_splitter
from .tensor import svd_split

# Largest number of entries allowed in the per-step working tensor.
DEFAULT_STEP_CAP = 2 ** 24
# Schmidt values at or below this (normalized state) are dropped by canonicalize.
SCHMIDT_CUTOFF = 1e-14


def transfer_left(env: np.ndarray, a: np.ndarray, bra: np.ndarray | None = None) -> np.ndarray:
    """Move a (ket, bra) left environment across one site: (chi_l, chi_l) -> (chi_r, chi_r)."""
    bra = a if bra is None else bra
    t = np.tensordot(env, a, axes=([0], [0]))  # (bra_l, n, ket_r)
    return np.tensordot(t, bra.conj(), axes=([0, 1], [0, 1]))


def transfer_right(env: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Move a (ket, bra) right environment across one site: (chi_r, chi_r) -> (chi_l, chi_l)."""
    t = np.tensordot(a, env, axes=([2], [0]))  # (ket_l, n, bra_r)
    return np.tensordot(t, a.conj(), axes=([1, 2], [1, 2]))


@dataclass(frozen=True, eq=False)
class MPS:
    sites: tuple[np.ndarray, ...]
    num_bins: int
    num_loops: int = 0
    truncation_error: float = 0.0

    def __post_init__(self):
        sites = tuple(np.asarray(s, dtype=np.complex128) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        if not sites:
            raise DimensionError("an MPS needs at least one site")
        for k, s in enumerate(sites):
            if s.ndim != 3:
                raise DimensionError(f"site {k} has rank {s.ndim}, expected 3")
        if sites[0].shape[0] != 1 or sites[-1].shape[2] != 1:
            raise DimensionError("boundary bond extents must be 1")
        for k in range(len(sites) - 1):
            if sites[k].shape[2] != sites[k + 1].shape[0]:
                raise DimensionError(
                    f"bond mismatch between sites {k} and {k + 1}: "
                    f"{sites[k].shape[2]} != {sites[k + 1].shape[0]}"
                )
        if self.num_bins + self.num_loops != len(sites):
            raise DimensionError("num_bins + num_loops must equal the number of sites")

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    @property
    def phys_dims(self) -> list[int]:
        return [s.shape[1] for s in self.sites]

    @property
    def bond_dims(self) -> list[int]:
        return [s.shape[2] for s in self.sites[:-1]]

    @property
    def loop_sites(self) -> range:
        return range(self.num_bins, self.num_sites)

    @cached_property
    def right_envs(self) -> list[np.ndarray]:
        """``right_envs[k]`` contracts sites ``k..`` of ket and bra; index (ket, bra)."""
        envs = [None] * (self.num_sites + 1)
        env = np.ones((1, 1), dtype=np.complex128)
        envs[self.num_sites] = env
        for k in range(self.num_sites - 1, -1, -1):
            env = transfer_right(env, self.sites[k])
            envs[k] = env
        return envs

    @cached_property
    def left_envs(self) -> list[np.ndarray]:
        """``left_envs[k]`` contracts sites ``..k-1`` of ket and bra; index (ket, bra)."""
        envs = [None] * (self.num_sites + 1)
        env = np.ones((1, 1), dtype=np.complex128)
        envs[0] = env
        for k, a in enumerate(self.sites):
            env = transfer_left(env, a)
            envs[k + 1] = env
        return envs

    def norm_squared(self) -> float:
        return float(self.right_envs[0][0, 0].real)

    def norm(self) -> float:
        return float(np.sqrt(max(self.norm_squared(), 0.0)))

    def to_dense(self, max_entries: int = DEFAULT_STEP_CAP) -> np.ndarray:
        """Full amplitude tensor with one axis per site (small states only)."""
        size = int(np.prod(self.phys_dims, dtype=float))
        if size > max_entries:
            raise ResourceCapError(f"dense state would have {size} entries (cap {max_entries})")
        psi = self.sites[0][0]
        for a in self.sites[1:]:
            psi = np.tensordot(psi, a, axes=([-1], [0]))
        return psi[..., 0]

    def amplitude(self, outcome: Sequence[int]) -> complex:
        if len(outcome) != self.num_sites:
            raise DimensionError(f"outcome has {len(outcome)} entries, MPS has {self.num_sites} sites")
        v = np.ones(1, dtype=np.complex128)
        for a, n in zip(self.sites, outcome):
            v = v @ a[:, int(n), :]
        return complex(v[0])


def _loop_vacuum_bin_tensor(u4: np.ndarray, n_in: int) -> np.ndarray:
    """Site tensor ``B[q, p, o] = U[o, p, q, n_in]`` (loop in, bin out, loop out)."""
    return np.ascontiguousarray(np.transpose(u4[:, :, :, n_in], (2, 1, 0)))


def build_single_loop(spec: ArchitectureSpec) -> MPS:
    """Exact state of ``N`` Fock bins after one loop that starts in vacuum.

    Each site is the coupler with its bin input fixed, so every bond has
    extent ``d`` and no truncation happens. The trailing site holds the
    final loop mode.
    """
    if spec.kind != "single_loop":
        raise ValueError(f"build_single_loop needs kind 'single_loop', got {spec.kind!r}")
    d = spec.fock_dim
    u4 = beam_splitter(spec.couplers[0], d)
    sites = []
    for k, n in enumerate(spec.photons_per_bin):
        b = _loop_vacuum_bin_tensor(u4, n)
        if k == 0:
            b = b[:1]  # loop starts in |0>
        sites.append(b)
    sites.append(np.eye(d, dtype=np.complex128).reshape(d, d, 1))
    return MPS(tuple(sites), num_bins=spec.num_bins, num_loops=1)


def register_couplers(spec: ArchitectureSpec) -> list[tuple[int, int, np.ndarray]]:
    """Coupler sequence applied each time step, on register modes.

    Register modes are the ``L`` loops (0..L-1) followed by the time bin (L).
    Each entry is ``(mode_a, mode_b, U4)``.
    """
    d = spec.fock_dim
    L = spec.num_loops
    tensors = [beam_splitter(c, d) for c in spec.couplers]
    if spec.kind == "single_loop":
        return [(0, 1, tensors[0])]
    if spec.kind == "loop_tower":
        seq = [(0, L, tensors[0])]
        seq += [(k, k - 1, tensors[k]) for k in range(1, L)]
        return seq
    if spec.kind == "loop_chain":
        return [(k, L, tensors[k]) for k in range(L)]
    raise ValueError(f"{spec.kind!r} cannot be simulated as a sequential MPS")


def _apply_two_mode(x: np.ndarray, u4: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply ``u4`` to axes ``i`` (mode a) and ``j`` (mode b) of ``x``."""
    out = np.tensordot(u4, x, axes=([2, 3], [i, j]))
    return np.moveaxis(out, (0, 1), (i, j))


def build_sequential(spec: ArchitectureSpec, step_cap: int = DEFAULT_STEP_CAP) -> MPS:
    """MPS of a loop tower or loop chain, with the loops as one ancilla register.

    After each step the bond to the register is re-split by SVD and truncated
    to ``spec.max_bond`` / ``spec.svd_tol``; discarded weight accumulates in
    ``truncation_error`` (root of summed squares).
    """
    if spec.kind not in ("single_loop", "loop_tower", "loop_chain"):
        raise ValueError(f"build_sequential cannot simulate kind {spec.kind!r}")
    d = spec.fock_dim
    L = spec.num_loops
    reg_dim = d ** L
    if reg_dim * d > step_cap:
        raise ResourceCapError(f"register of {L} loops at d={d} exceeds step cap {step_cap}")
    seq = register_couplers(spec)

    # env[alpha, loops...] maps the current bond onto the loop register
    env = np.zeros((1,) + (d,) * L, dtype=np.complex128)
    env[(0,) * (L + 1)] = 1.0
    sites = []
    err2 = 0.0
    for n in spec.photons_per_bin:
        chi = env.shape[0]
        if chi * reg_dim * d > step_cap:
            raise ResourceCapError(f"step tensor of {chi * reg_dim * d} entries exceeds cap {step_cap}")
        x = np.zeros(env.shape + (d,), dtype=np.complex128)
        x[..., n] = env
        for i, j, u4 in seq:
            x = _apply_two_mode(x, u4, 1 + i, 1 + j)
        # (alpha, bin) | (loops...)
        x = np.moveaxis(x, -1, 1)
        res = svd_split(x, (0, 1), max_rank=spec.max_bond, tol=spec.svd_tol)
        err2 += res.truncation_error ** 2
        sites.append(res.left_isometry)
        env = res.singular_values.reshape((-1,) + (1,) * L) * res.right_isometry
    # peel the loop register into one site per loop
    for k in range(L - 1):
        res = svd_split(env, (0, 1), max_rank=spec.max_bond, tol=spec.svd_tol)
        err2 += res.truncation_error ** 2
        sites.append(res.left_isometry)
        env = res.singular_values.reshape((-1,) + (1,) * (L - k - 1)) * res.right_isometry
    sites.append(env.reshape(env.shape[0], d, 1))
    return MPS(tuple(sites), num_bins=spec.num_bins, num_loops=L, truncation_error=float(np.sqrt(err2)))


def build(spec: ArchitectureSpec, step_cap: int = DEFAULT_STEP_CAP) -> MPS:
    """Dispatch to the exact single-loop builder or the sequential one."""
    if spec.kind == "single_loop" and spec.max_bond is None:
        return build_single_loop(spec)
    return build_sequential(spec, step_cap=step_cap)


@dataclass(frozen=True, eq=False)
class CanonicalMPS:
    """Vidal form: ``psi = Gamma_0 lambda_1 Gamma_1 lambda_2 ... Gamma_{n-1}``.

    ``lambdas[i - 1]`` holds the Schmidt values of cut ``i``. ``right`` keeps
    the right-canonical tensors ``Gamma_k lambda_{k+1}`` that the gammas were
    derived from, so that consumers do not have to divide by small lambdas.
    """

    gammas: tuple[np.ndarray, ...]
    lambdas: tuple[np.ndarray, ...]
    right: tuple[np.ndarray, ...] = field(repr=False)
    num_bins: int = 0
    num_loops: int = 0

    @property
    def num_sites(self) -> int:
        return len(self.gammas)

    def schmidt_values(self, cut: int) -> np.ndarray:
        if not 1 <= cut <= self.num_sites - 1:
            raise DimensionError(f"cut {cut} outside 1..{self.num_sites - 1}")
        return self.lambdas[cut - 1]

    def left_tensor(self, k: int) -> np.ndarray:
        """``lambda_k Gamma_k`` (left-canonical)."""
        g = self.gammas[k]
        if k == 0:
            return g
        return self.lambdas[k - 1][:, None, None] * g

    def right_tensor(self, k: int) -> np.ndarray:
        """``Gamma_k lambda_{k+1}`` (right-canonical)."""
        return self.right[k]

    def to_mps(self) -> MPS:
        return MPS(self.right, num_bins=self.num_bins, num_loops=self.num_loops)


def canonicalize(m: MPS, cutoff: float = SCHMIDT_CUTOFF) -> CanonicalMPS:
    """Bring ``m`` (normalized on the way) into Vidal canonical form.

    A QR sweep left to right is followed by an SVD sweep right to left.
    Schmidt values ``<= cutoff`` are discarded (at least one is always kept).
    """
    sites = list(m.sites)
    n = len(sites)
    for k in range(n - 1):
        a = sites[k]
        chl, dk, chr_ = a.shape
        q, r = np.linalg.qr(a.reshape(chl * dk, chr_))
        sites[k] = q.reshape(chl, dk, q.shape[1])
        sites[k + 1] = np.tensordot(r, sites[k + 1], axes=([1], [0]))
    nrm = np.linalg.norm(sites[-1])
    if not np.isfinite(nrm) or nrm == 0.0:
        raise ZeroNormError("cannot canonicalize a state of zero norm")
    sites[-1] = sites[-1] / nrm

    lambdas: list[np.ndarray] = [None] * (n - 1)
    right: list[np.ndarray] = [None] * n
    for k in range(n - 1, 0, -1):
        a = sites[k]
        res = svd_split(a, (0,), tol=0.0)
        s = res.singular_values
        keep = max(1, int(np.count_nonzero(s > cutoff)))
        s = s[:keep]
        s = s / np.linalg.norm(s)
        right[k] = res.right_isometry[:keep]
        lambdas[k - 1] = s
        us = res.left_isometry[:, :keep] * s
        sites[k - 1] = np.tensordot(sites[k - 1], us, axes=([2], [0]))
    first = sites[0]
    right[0] = first / np.linalg.norm(first)

    gammas = []
    for k in range(n):
        b = right[k]
        if k < n - 1:
            gammas.append(b / lambdas[k][None, None, :])
        else:
            gammas.append(b)
    return CanonicalMPS(
        gammas=tuple(gammas),
        lambdas=tuple(lambdas),
        right=tuple(right),
        num_bins=m.num_bins,
        num_loops=m.num_loops,
    )


def random_mps(
    num_sites: int,
    phys_dim: int,
    bond_dim: int,
    rng: np.random.Generator,
) -> MPS:
    """Random complex MPS with uniform extents (test fixture helper)."""
    sites = []
    for k in range(num_sites):
        chl = 1 if k == 0 else bond_dim
        chr_ = 1 if k == num_sites - 1 else bond_dim
        a = rng.normal(size=(chl, phys_dim, chr_)) + 1j * rng.normal(size=(chl, phys_dim, chr_))
        sites.append(a)
    return MPS(tuple(sites), num_bins=num_sites, num_loops=0)


def product_state(occupations: Sequence[int], d: int, num_loops: int = 0) -> MPS:
    sites = []
    for n in occupations:
        a = np.zeros((1, d, 1), dtype=np.complex128)
        a[0, int(n), 0] = 1.0
        sites.append(a)
    return MPS(tuple(sites), num_bins=len(occupations) - num_loops, num_loops=num_loops)


def fidelity(a: MPS, b: MPS) -> float:
    """|<a|b>| / (|a| |b|) for MPS on identical physical dimensions."""
    if a.phys_dims != b.phys_dims:
        raise DimensionError("states live on different physical spaces")
    env = np.ones((1, 1), dtype=np.complex128)
    for x, y in zip(a.sites, b.sites):
        env = transfer_left(env, y, x)
    overlap = abs(env[0, 0])
    return float(overlap / (a.norm() * b.norm()))
