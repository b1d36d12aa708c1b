"""Dense complex tensor kernels.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored
row-major. Nothing here mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DecompositionError, DimensionError

# Singular values closer than this are treated as one degenerate group.
DEGENERACY_ATOL = 1e-12
ANTIHERMITIAN_ATOL = 1e-12


def as_tensor(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Coerce ``data`` to a complex128 array, optionally reshaping it.

    Raises :class:`DimensionError` if an extent is < 1 or the element count
    does not match ``shape``.
    """
    arr = np.asarray(data, dtype=np.complex128)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise DimensionError(f"all extents must be >= 1, got {shape}")
        if int(np.prod(shape)) != arr.size:
            raise DimensionError(f"cannot view {arr.size} values as shape {shape}")
        arr = arr.reshape(shape)
    elif any(s < 1 for s in arr.shape):
        raise DimensionError(f"all extents must be >= 1, got {arr.shape}")
    return arr


def contract(a: np.ndarray, b: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired indices of ``a`` and ``b``.

    ``pairs`` lists ``(index_in_a, index_in_b)``. The result carries the
    unpaired indices of ``a`` followed by those of ``b``, each in their
    original order.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a, axes_b = [], []
    for ia, ib in pairs:
        if not (0 <= ia < a.ndim) or not (0 <= ib < b.ndim):
            raise DimensionError(f"index pair {(ia, ib)} out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"extent mismatch on pair {(ia, ib)}: {a.shape[ia]} != {b.shape[ib]}"
            )
        axes_a.append(ia)
        axes_b.append(ib)
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise DimensionError("an index appears in more than one pair")
    return np.tensordot(a, b, axes=(axes_a, axes_b))


@dataclass(frozen=True)
class SvdResult:
    """Truncated singular value decomposition across a bipartition.

    ``left_isometry`` has the left-group extents followed by the kept rank;
    ``right_isometry`` has the kept rank followed by the right-group extents.
    """

    left_isometry: np.ndarray
    singular_values: np.ndarray
    right_isometry: np.ndarray
    truncation_error: float

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)

    def reconstruct(self) -> np.ndarray:
        k = self.rank
        left = self.left_isometry.reshape(-1, k) * self.singular_values
        out = left @ self.right_isometry.reshape(k, -1)
        return out.reshape(self.left_isometry.shape[:-1] + self.right_isometry.shape[1:])


def _svd(mat: np.ndarray):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        # gesvd is slower but converges on inputs where gesdd does not
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DecompositionError(f"SVD failed on a {mat.shape} matrix: {exc}") from exc


def kept_rank(s: np.ndarray, max_rank: int | None, tol: float) -> int:
    """Number of leading singular values to keep.

    Values below ``tol * s[0]`` are dropped. When the ``max_rank`` cut would
    split a group of (numerically) equal nonzero values, the whole group is
    dropped instead so the kept spectrum never depends on LAPACK ordering.
    """
    if s.size == 0:
        return 0
    k = int(s.size)
    if tol > 0:
        k = int(np.count_nonzero(s >= tol * s[0]))
    k = max(k, 1)
    if max_rank is not None and k > max_rank:
        k = max_rank
        if s[k - 1] > DEGENERACY_ATOL:
            j = k
            while j > 0 and abs(s[j - 1] - s[k]) <= DEGENERACY_ATOL:
                j -= 1
            if j > 0:
                k = j
    return k


def svd_split(
    t: np.ndarray,
    cut: Sequence[int],
    max_rank: int | None = None,
    tol: float = 0.0,
) -> SvdResult:
    """Split ``t`` into isometry * singular values * isometry.

    ``cut`` names the indices that go to the left factor (kept in the given
    order); the remaining indices go right, in their original order.
    """
    t = np.asarray(t, dtype=np.complex128)
    left = [int(i) for i in cut]
    if any(not 0 <= i < t.ndim for i in left) or len(set(left)) != len(left):
        raise DimensionError(f"invalid cut {tuple(cut)} for a rank-{t.ndim} tensor")
    right = [i for i in range(t.ndim) if i not in left]
    if not left or not right:
        raise DimensionError("cut must leave at least one index on each side")
    if max_rank is not None and max_rank < 1:
        raise DimensionError(f"max_rank must be positive, got {max_rank}")
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")

    perm = np.transpose(t, left + right)
    lshape = perm.shape[: len(left)]
    rshape = perm.shape[len(left):]
    mat = perm.reshape(int(np.prod(lshape)), int(np.prod(rshape)))
    if not np.all(np.isfinite(mat)):
        raise DecompositionError("tensor contains non-finite entries")

    u, s, vh = _svd(mat)
    k = kept_rank(s, max_rank, tol)
    err = float(np.sqrt(np.sum(s[k:] ** 2)))
    return SvdResult(
        left_isometry=u[:, :k].reshape(lshape + (k,)),
        singular_values=s[:k].copy(),
        right_isometry=vh[:k].reshape((k,) + rshape),
        truncation_error=err,
    )


def expm_antihermitian(g: np.ndarray) -> np.ndarray:
    """exp(g) for anti-Hermitian ``g`` via the eigenbasis of the Hermitian ``i g``."""
    g = np.asarray(g, dtype=np.complex128)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {g.shape}")
    if g.size and np.max(np.abs(g + g.conj().T)) > ANTIHERMITIAN_ATOL:
        raise ValueError("generator is not anti-Hermitian")
    h = 1j * g
    h = 0.5 * (h + h.conj().T)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigendecomposition failed: {exc}") from exc
    # g = -i h  =>  exp(g) = V exp(-i w) V^dagger
    return (v * np.exp(-1j * w)) @ v.conj().T
