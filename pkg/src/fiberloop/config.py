"""Run configuration: parsing, strict validation and resolution.

Configs are TOML (or JSON) documents. Angles are given as multiples of pi.
Unknown keys anywhere are errors.

Example::

    studies = ["entropy_profile", "samples"]
    seed = 7
    sample_count = 1000

    [architecture]
    kind = "single_loop"
    num_bins = 300
    photons = 1
    fock_dim = 12
    couplers = [{theta_over_pi = 0.25}]
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .architecture import KINDS, SIMULATABLE, ArchitectureSpec
from .errors import ConfigError
from .fock import CouplerSpec

STUDIES = ("entropy_profile", "max_entropy_vs_n", "schmidt", "correlations", "samples", "graph_report")
STATE_STUDIES = ("entropy_profile", "max_entropy_vs_n", "schmidt", "correlations", "samples")


@dataclass(frozen=True)
class CouplerConfig:
    theta_over_pi: float
    phi_over_pi: float = 0.0

    def spec(self) -> CouplerSpec:
        return CouplerSpec(self.theta_over_pi * math.pi, self.phi_over_pi * math.pi)


@dataclass(frozen=True)
class ArchitectureConfig:
    kind: str
    num_bins: int
    fock_dim: int
    couplers: tuple[CouplerConfig, ...]
    num_loops: int = 1
    photons: int | None = None
    photons_per_bin: tuple[int, ...] | None = None
    max_bond: int | None = None
    svd_tol: float = 1e-14

    def train(self) -> tuple[int, ...]:
        if self.photons_per_bin is not None:
            return tuple(self.photons_per_bin)
        return (self.photons or 0,) * self.num_bins

    def spec(self, fock_dim: int | None = None, max_bond: int | None = None) -> ArchitectureSpec:
        return ArchitectureSpec(
            kind=self.kind,
            photons_per_bin=self.train(),
            couplers=tuple(c.spec() for c in self.couplers),
            fock_dim=fock_dim if fock_dim is not None else self.fock_dim,
            num_loops=self.num_loops,
            max_bond=max_bond if max_bond is not None else self.max_bond,
            svd_tol=self.svd_tol,
        )


@dataclass(frozen=True)
class ConvergenceConfig:
    enabled: bool = False
    rel_tol: float = 1e-4
    max_fock_dim: int = 64
    max_rungs: int = 8


@dataclass(frozen=True)
class CorrelationConfig:
    anchor: int | None = None  # 1-based bin; default puts the last pair at bin N
    max_separation: int = 10


@dataclass(frozen=True)
class SchmidtConfig:
    cut: int | None = None  # default: after the last bin
    count: int = 8


@dataclass(frozen=True)
class MaxEntropyConfig:
    photons: tuple[int, ...] = (1, 2, 3, 4)


@dataclass(frozen=True)
class GraphConfig:
    heuristic: str = "min_fill"
    family_scaling: str = "bins"  # "bins": N grows; "square": L = N grows
    family_sizes: tuple[int, ...] = (2, 4, 8, 16)


@dataclass(frozen=True)
class LimitsConfig:
    oracle_cap: int = 2 ** 24
    step_cap: int = 2 ** 24


@dataclass(frozen=True)
class RunConfig:
    architecture: ArchitectureConfig
    studies: tuple[str, ...] = ("entropy_profile",)
    sample_count: int = 1000
    seed: int = 0
    include_loop_sites: bool = True
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    correlations: CorrelationConfig = field(default_factory=CorrelationConfig)
    schmidt: SchmidtConfig = field(default_factory=SchmidtConfig)
    max_entropy_vs_n: MaxEntropyConfig = field(default_factory=MaxEntropyConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    limits: LimitsConfig = field(default_factory=LimitsConfig)

    def spec(self, **kw) -> ArchitectureSpec:
        return self.architecture.spec(**kw)

    def to_dict(self) -> dict[str, Any]:
        return _drop_none(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _drop_none(obj):
    if isinstance(obj, dict):
        return {k: _drop_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_drop_none(v) for v in obj]
    return obj


# ---------------------------------------------------------------- strict parsing


def _expect(table: dict, path: str, allowed: set[str], required: set[str] = frozenset()) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"{path or 'document'}: expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{path + '.' if path else ''}{unknown[0]}: unknown field")
    missing = sorted(required - set(table))
    if missing:
        raise ConfigError(f"{path + '.' if path else ''}{missing[0]}: required field missing")


def _typed(value, kind, path: str):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise TypeError(kind)


def _int_list(value, path: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list of integers")
    return tuple(_typed(v, int, f"{path}[{k}]") for k, v in enumerate(value))


def _section(doc: dict, name: str, fields: dict[str, Any]) -> dict[str, Any]:
    table = doc.get(name, {})
    _expect(table, name, set(fields))
    out = {}
    for key, kind in fields.items():
        if key not in table:
            continue
        path = f"{name}.{key}"
        if kind == "intlist":
            out[key] = _int_list(table[key], path)
        elif kind == "optint":
            out[key] = _typed(table[key], int, path)
        else:
            out[key] = _typed(table[key], kind, path)
    return out


def _parse_architecture(doc: dict) -> ArchitectureConfig:
    table = doc.get("architecture")
    if table is None:
        raise ConfigError("architecture: required table missing")
    allowed = {
        "kind", "num_bins", "fock_dim", "couplers", "num_loops", "photons",
        "photons_per_bin", "max_bond", "svd_tol",
    }
    _expect(table, "architecture", allowed, {"kind", "fock_dim", "couplers"})
    kind = _typed(table["kind"], str, "architecture.kind")
    if kind not in KINDS:
        raise ConfigError(f"architecture.kind: {kind!r} is not one of {', '.join(KINDS)}")
    couplers_raw = table["couplers"]
    if not isinstance(couplers_raw, list) or not couplers_raw:
        raise ConfigError("architecture.couplers: expected a non-empty list of tables")
    couplers = []
    for k, c in enumerate(couplers_raw):
        path = f"architecture.couplers[{k}]"
        _expect(c, path, {"theta_over_pi", "phi_over_pi"}, {"theta_over_pi"})
        couplers.append(
            CouplerConfig(
                theta_over_pi=_typed(c["theta_over_pi"], float, path + ".theta_over_pi"),
                phi_over_pi=_typed(c.get("phi_over_pi", 0.0), float, path + ".phi_over_pi"),
            )
        )
    photons_per_bin = None
    if "photons_per_bin" in table:
        photons_per_bin = _int_list(table["photons_per_bin"], "architecture.photons_per_bin")
    photons = _typed(table["photons"], int, "architecture.photons") if "photons" in table else None
    if photons is not None and photons_per_bin is not None:
        raise ConfigError("architecture.photons: give either photons or photons_per_bin, not both")
    if "num_bins" in table:
        num_bins = _typed(table["num_bins"], int, "architecture.num_bins")
    elif photons_per_bin is not None:
        num_bins = len(photons_per_bin)
    else:
        raise ConfigError("architecture.num_bins: required field missing")
    if photons_per_bin is not None and len(photons_per_bin) != num_bins:
        raise ConfigError("architecture.photons_per_bin: length must equal num_bins")
    if photons is None and photons_per_bin is None:
        photons = 1
    cfg = ArchitectureConfig(
        kind=kind,
        num_bins=num_bins,
        fock_dim=_typed(table["fock_dim"], int, "architecture.fock_dim"),
        couplers=tuple(couplers),
        num_loops=_typed(table.get("num_loops", 1), int, "architecture.num_loops"),
        photons=photons,
        photons_per_bin=photons_per_bin,
        max_bond=_typed(table["max_bond"], int, "architecture.max_bond") if "max_bond" in table else None,
        svd_tol=_typed(table.get("svd_tol", 1e-14), float, "architecture.svd_tol"),
    )
    try:
        cfg.spec()
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"architecture: {exc}") from exc
    return cfg


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed document into a :class:`RunConfig`."""
    top = {
        "architecture", "studies", "sample_count", "seed", "include_loop_sites", "convergence",
        "correlations", "schmidt", "max_entropy_vs_n", "graph", "limits",
    }
    _expect(doc, "", top, {"architecture"})
    arch = _parse_architecture(doc)

    studies = doc.get("studies", ["entropy_profile"])
    if not isinstance(studies, list) or not all(isinstance(s, str) for s in studies):
        raise ConfigError("studies: expected a list of study names")
    for s in studies:
        if s not in STUDIES:
            raise ConfigError(f"studies: unknown study {s!r}; expected one of {', '.join(STUDIES)}")
        if s in STATE_STUDIES and arch.kind not in SIMULATABLE:
            raise ConfigError(f"studies: {s!r} needs a simulatable architecture, not {arch.kind!r}")
    if "max_entropy_vs_n" in studies and arch.kind != "single_loop":
        raise ConfigError("studies: 'max_entropy_vs_n' is defined for single_loop only")

    kw = dict(
        architecture=arch,
        studies=tuple(studies),
        convergence=ConvergenceConfig(
            **_section(doc, "convergence", {"enabled": bool, "rel_tol": float, "max_fock_dim": int, "max_rungs": int})
        ),
        correlations=CorrelationConfig(
            **_section(doc, "correlations", {"anchor": "optint", "max_separation": int})
        ),
        schmidt=SchmidtConfig(**_section(doc, "schmidt", {"cut": "optint", "count": int})),
        max_entropy_vs_n=MaxEntropyConfig(**_section(doc, "max_entropy_vs_n", {"photons": "intlist"})),
        graph=GraphConfig(
            **_section(doc, "graph", {"heuristic": str, "family_scaling": str, "family_sizes": "intlist"})
        ),
        limits=LimitsConfig(**_section(doc, "limits", {"oracle_cap": int, "step_cap": int})),
    )
    for key, kind in (("sample_count", int), ("seed", int), ("include_loop_sites", bool)):
        if key in doc:
            kw[key] = _typed(doc[key], kind, key)
    cfg = RunConfig(**kw)
    _check_ranges(cfg)
    return cfg


def _check_ranges(cfg: RunConfig) -> None:
    if cfg.sample_count < 1:
        raise ConfigError("sample_count: must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed: must be a nonnegative integer")
    if cfg.convergence.rel_tol <= 0:
        raise ConfigError("convergence.rel_tol: must be positive")
    if cfg.convergence.max_rungs < 2:
        raise ConfigError("convergence.max_rungs: need at least two rungs to compare")
    if cfg.correlations.max_separation < 1:
        raise ConfigError("correlations.max_separation: must be >= 1")
    N = cfg.architecture.num_bins
    if cfg.correlations.anchor is not None:
        a = cfg.correlations.anchor
        if a < 1 or a + cfg.correlations.max_separation > N:
            raise ConfigError("correlations.anchor: anchor + max_separation must stay within the bins")
    elif "correlations" in cfg.studies and cfg.correlations.max_separation >= N:
        raise ConfigError("correlations.max_separation: must be smaller than num_bins")
    if cfg.schmidt.cut is not None and not 1 <= cfg.schmidt.cut <= N + cfg.architecture.num_loops - 1:
        raise ConfigError("schmidt.cut: outside the chain")
    if cfg.graph.heuristic not in ("min_fill", "min_degree"):
        raise ConfigError("graph.heuristic: expected 'min_fill' or 'min_degree'")
    if cfg.graph.family_scaling not in ("bins", "square"):
        raise ConfigError("graph.family_scaling: expected 'bins' or 'square'")
    if len(set(cfg.graph.family_sizes)) < 2 or min(cfg.graph.family_sizes) < 1:
        raise ConfigError("graph.family_sizes: need at least two distinct positive sizes")
    if any(n < 0 for n in cfg.max_entropy_vs_n.photons):
        raise ConfigError("max_entropy_vs_n.photons: occupations must be nonnegative")


def loads(text: str) -> RunConfig:
    """Parse TOML, or JSON when the document starts with '{'."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    else:
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(exc)) from exc
    return parse_config(doc)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return loads(text)
