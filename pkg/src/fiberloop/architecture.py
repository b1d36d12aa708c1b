"""Declarative description of a fiber-loop network and its input train."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DimensionError
from .fock import CouplerSpec

KINDS = ("single_loop", "loop_tower", "loop_chain", "tritter_cylinder")
SIMULATABLE = ("single_loop", "loop_tower", "loop_chain")


@dataclass(frozen=True)
class ArchitectureSpec:
    """One simulated (or analyzed) loop architecture.

    ``couplers`` holds one spec per loop for towers and chains. For a tower,
    coupler 0 links the time bin to loop 1 and coupler k links loop k to
    loop k+1. For a chain, coupler k links loop k+1 to the bin leaving loop
    k. A tritter cylinder uses ``3`` specs per tritter (shared by every row)
    and ``num_loops`` rows.
    """

    kind: str
    photons_per_bin: tuple[int, ...]
    couplers: tuple[CouplerSpec, ...]
    fock_dim: int
    num_loops: int = 1
    max_bond: int | None = None
    svd_tol: float = 1e-14

    def __post_init__(self):
        object.__setattr__(self, "photons_per_bin", tuple(int(n) for n in self.photons_per_bin))
        object.__setattr__(self, "couplers", tuple(self.couplers))
        if self.kind not in KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}; expected one of {KINDS}")
        if self.fock_dim < 2:
            raise DimensionError(f"fock_dim must be >= 2, got {self.fock_dim}")
        if self.num_loops < 1:
            raise ValueError(f"num_loops must be >= 1, got {self.num_loops}")
        if not self.photons_per_bin:
            raise ValueError("at least one time bin is required")
        for n in self.photons_per_bin:
            if n < 0 or n > self.fock_dim - 1:
                raise DimensionError(f"bin occupation {n} outside [0, {self.fock_dim - 1}]")
        expected = {
            "single_loop": 1,
            "loop_tower": self.num_loops,
            "loop_chain": self.num_loops,
            "tritter_cylinder": 3,
        }[self.kind]
        if self.kind == "single_loop" and self.num_loops != 1:
            raise ValueError("single_loop requires num_loops == 1")
        if len(self.couplers) != expected:
            raise ValueError(f"{self.kind} needs {expected} coupler specs, got {len(self.couplers)}")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError(f"max_bond must be positive, got {self.max_bond}")
        if self.svd_tol < 0:
            raise ValueError(f"svd_tol must be nonnegative, got {self.svd_tol}")

    @property
    def num_bins(self) -> int:
        return len(self.photons_per_bin)

    @property
    def total_photons(self) -> int:
        return sum(self.photons_per_bin)

    @property
    def num_sites(self) -> int:
        """Physical sites of the output state: bins followed by loop modes."""
        return self.num_bins + self.num_loops

    @classmethod
    def single_loop(cls, theta: float, photons_per_bin, fock_dim: int, phi: float = 0.0, **kw):
        return cls(
            kind="single_loop",
            photons_per_bin=tuple(photons_per_bin),
            couplers=(CouplerSpec(theta, phi),),
            fock_dim=fock_dim,
            **kw,
        )

    def with_dims(self, fock_dim: int, max_bond: int | None) -> "ArchitectureSpec":
        return replace(self, fock_dim=fock_dim, max_bond=max_bond)


def uniform_train(n: int, num_bins: int) -> tuple[int, ...]:
    return (n,) * num_bins

