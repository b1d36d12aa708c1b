"""Tensor-network graphs of loop architectures and their treewidth.

Graphs are built from the same :class:`ArchitectureSpec` that drives the
simulation: each coupler application becomes a vertex, each input state a
vertex, and an edge joins two vertices whenever a mode leaves one and
enters the other. Outputs stay as open edges unless ``measured`` is set, in
which case every output gets a measurement vertex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .architecture import ArchitectureSpec

# Heuristic exponent on the coupler count in the contraction-cost estimate.
COUPLER_EXPONENT = 3.0
# A family whose log-log treewidth growth exponent reaches this is called hard.
HARD_GROWTH_EXPONENT = 0.25
EXACT_TREEWIDTH_MAX_VERTICES = 20


@dataclass
class TNGraph:
    graph: nx.Graph = field(default_factory=nx.Graph)
    open_edges: list[tuple[int, str, int]] = field(default_factory=list)

    def add_vertex(self, kind: str, label: str) -> int:
        vid = self.graph.number_of_nodes()
        self.graph.add_node(vid, kind=kind, label=label)
        return vid

    def add_edge(self, u: int, v: int, dim: int) -> None:
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if u not in self.graph or v not in self.graph:
            raise ValueError(f"edge ({u}, {v}) has a missing endpoint")
        if self.graph.has_edge(u, v):
            # parallel bonds merge into one edge of the product dimension
            self.graph[u][v]["dim"] *= dim
        else:
            self.graph.add_edge(u, v, dim=dim)

    @property
    def num_vertices(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def num_edges(self) -> int:
        return self.graph.number_of_edges()

    def label(self, v: int) -> str:
        return self.graph.nodes[v]["label"]

    def num_independent_cycles(self) -> int:
        """Cycle rank E - V + components (0 exactly for forests)."""
        g = self.graph
        return g.number_of_edges() - g.number_of_nodes() + nx.number_connected_components(g)


def _circuit_graph(
    num_modes: int,
    inputs: Sequence[tuple[str, int]],
    gates: Iterable[tuple[str, Sequence[int]]],
    outputs: Sequence[tuple[str, int]],
    d: int,
    measured: bool,
) -> TNGraph:
    """Graph of a circuit given as input states, ordered gates and outputs.

    ``inputs`` and ``outputs`` are ``(label, mode)``; gates are
    ``(label, modes)``.
    """
    tn = TNGraph()
    last: list[int | None] = [None] * num_modes
    for label, mode in inputs:
        last[mode] = tn.add_vertex("input", label)
    for label, modes in gates:
        v = tn.add_vertex("coupler", label)
        for mode in modes:
            if last[mode] is not None:
                tn.add_edge(last[mode], v, d)
            last[mode] = v
    for label, mode in outputs:
        if measured:
            w = tn.add_vertex("measurement", label)
            tn.add_edge(last[mode], w, d)
        else:
            tn.open_edges.append((last[mode], label, d))
    return tn


def build_graph(spec: ArchitectureSpec, measured: bool = False) -> TNGraph:
    """Tensor-network graph of ``spec``.

    Single loops give a caterpillar tree; towers and chains with two or more
    loops give ladder/grid graphs with cycles; the tritter cylinder gives a
    grid whose columns wrap onto the next column.
    """
    d = spec.fock_dim
    N = spec.num_bins
    L = spec.num_loops
    if spec.kind in ("single_loop", "loop_tower", "loop_chain"):
        # modes: loops 0..L-1, bins L..L+N-1
        inputs = [(f"loop{k + 1}_in", k) for k in range(L)]
        gates = []
        for i in range(N):
            b = L + i
            inputs.append((f"bin{i + 1}_in", b))
            if spec.kind == "loop_chain":
                gates += [(f"U{k + 1}[{i + 1}]", (k, b)) for k in range(L)]
            else:
                gates.append((f"U1[{i + 1}]", (0, b)))
                gates += [(f"U{k + 1}[{i + 1}]", (k, k - 1)) for k in range(1, L)]
        outputs = [(f"bin{i + 1}_out", L + i) for i in range(N)]
        outputs += [(f"loop{k + 1}_out", k) for k in range(L)]
        return _circuit_graph(L + N, inputs, gates, outputs, d, measured)
    if spec.kind == "tritter_cylinder":
        # modes: shared loop 0, local loops 1..R, bins after that (row-major per step)
        R = L
        inputs = [("shared_in", 0)] + [(f"loop{j + 1}_in", 1 + j) for j in range(R)]
        gates = []
        outputs = []
        for i in range(N):
            for j in range(R):
                b = 1 + R + i * R + j
                inputs.append((f"bin{j + 1},{i + 1}_in", b))
                gates.append((f"T{j + 1}[{i + 1}]", (0, 1 + j, b)))
                outputs.append((f"bin{j + 1},{i + 1}_out", b))
        outputs += [("shared_out", 0)] + [(f"loop{j + 1}_out", 1 + j) for j in range(R)]
        return _circuit_graph(1 + R + N * R, inputs, gates, outputs, d, measured)
    raise ValueError(f"unknown architecture kind {spec.kind!r}")


def grid_graph(rows: int, cols: int) -> TNGraph:
    tn = TNGraph()
    ids = {}
    for r in range(rows):
        for c in range(cols):
            ids[r, c] = tn.add_vertex("coupler", f"({r},{c})")
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                tn.add_edge(ids[r, c], ids[r, c + 1], 2)
            if r + 1 < rows:
                tn.add_edge(ids[r, c], ids[r + 1, c], 2)
    return tn


def from_networkx(g: nx.Graph, dim: int = 2) -> TNGraph:
    """Relabel ``g`` onto 0..n-1 (sorted node order) as a TNGraph."""
    tn = TNGraph()
    index = {}
    for v in sorted(g.nodes, key=repr):
        index[v] = tn.add_vertex("coupler", str(v))
    for u, v in g.edges:
        tn.add_edge(index[u], index[v], dim)
    return tn


# ---------------------------------------------------------------- decompositions


@dataclass
class TreeDecomposition:
    tree: nx.Graph
    bags: dict[int, frozenset]

    def __post_init__(self):
        self.bags = {k: frozenset(v) for k, v in self.bags.items()}
        for k in self.bags:
            self.tree.add_node(k)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    rule: int | None = None
    message: str = ""
    witness: tuple = ()


class InvalidDecomposition(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(f"rule {report.rule} violated: {report.message}")
        self.report = report


def validate(td: TreeDecomposition, g: TNGraph | nx.Graph) -> ValidationReport:
    """Check the three tree-decomposition rules; report the first failure.

    Rule 0 flags a bag structure that is not a tree at all.
    """
    graph = g.graph if isinstance(g, TNGraph) else g
    tree = td.tree
    if tree.number_of_nodes() == 0 or not nx.is_tree(tree):
        return ValidationReport(False, 0, "bag structure is not a connected acyclic graph")
    if set(tree.nodes) != set(td.bags):
        return ValidationReport(False, 0, "tree nodes and bag keys differ")
    for v in sorted(graph.nodes):
        if not any(v in bag for bag in td.bags.values()):
            return ValidationReport(False, 1, f"vertex {v} is in no bag", (v,))
    for u, v in sorted(tuple(sorted(e)) for e in graph.edges):
        if not any(u in bag and v in bag for bag in td.bags.values()):
            return ValidationReport(False, 2, f"no bag holds both ends of edge ({u}, {v})", (u, v))
    for v in sorted(graph.nodes):
        holders = [k for k, bag in td.bags.items() if v in bag]
        if not nx.is_connected(tree.subgraph(holders)):
            return ValidationReport(
                False, 3, f"bags containing vertex {v} are not a connected subtree", (v, tuple(sorted(holders)))
            )
    return ValidationReport(True)


def width(td: TreeDecomposition, g: TNGraph | nx.Graph | None = None) -> int:
    """max bag size - 1. Validates first when the graph is supplied."""
    if g is not None:
        report = validate(td, g)
        if not report.valid:
            raise InvalidDecomposition(report)
    elif td.tree.number_of_nodes() == 0 or not nx.is_tree(td.tree):
        raise InvalidDecomposition(ValidationReport(False, 0, "bag structure is not a tree"))
    return max(len(b) for b in td.bags.values()) - 1


# ---------------------------------------------------------------- elimination


def _fill_in(adj: dict[int, set[int]], v: int) -> int:
    nb = sorted(adj[v])
    return sum(1 for a, b in itertools.combinations(nb, 2) if b not in adj[a])


def elimination_ordering(graph: nx.Graph, heuristic: str = "min_fill") -> list[int]:
    """Greedy elimination order; ties go to the smallest vertex."""
    if heuristic not in ("min_fill", "min_degree"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    adj = {v: set(graph.neighbors(v)) for v in graph.nodes}
    order = []
    while adj:
        if heuristic == "min_degree":
            v = min(adj, key=lambda u: (len(adj[u]), u))
        else:
            v = min(adj, key=lambda u: (_fill_in(adj, u), len(adj[u]), u))
        nb = adj.pop(v)
        for a in nb:
            adj[a].discard(v)
            adj[a] |= nb - {a}
        order.append(v)
    return order


def decomposition_from_ordering(graph: nx.Graph, order: Sequence[int]) -> TreeDecomposition:
    """Bags {v} + later neighbors; each bag hangs off its earliest-eliminated later neighbor."""
    position = {v: k for k, v in enumerate(order)}
    adj = {v: set(graph.neighbors(v)) for v in graph.nodes}
    bags = {}
    parent = {}
    for v in order:
        nb = adj.pop(v)
        bags[v] = frozenset(nb | {v})
        for a in nb:
            adj[a].discard(v)
            adj[a] |= nb - {a}
        parent[v] = min(nb, key=position.__getitem__) if nb else None
    tree = nx.Graph()
    tree.add_nodes_from(bags)
    roots = []
    for v, p in parent.items():
        if p is None:
            roots.append(v)
        else:
            tree.add_edge(v, p)
    # components of a disconnected graph share no vertices; chain their roots
    for a, b in zip(roots, roots[1:]):
        tree.add_edge(a, b)
    return TreeDecomposition(tree=tree, bags=bags)


def elimination_width(graph: nx.Graph, order: Sequence[int]) -> int:
    adj = {v: set(graph.neighbors(v)) for v in graph.nodes}
    best = -1 if not adj else 0
    for v in order:
        nb = adj.pop(v)
        best = max(best, len(nb))
        for a in nb:
            adj[a].discard(v)
            adj[a] |= nb - {a}
    return best


@dataclass(frozen=True)
class TreewidthBound:
    bound: int
    decomposition: TreeDecomposition
    ordering: tuple[int, ...]
    num_components: int


def treewidth_upper_bound(g: TNGraph | nx.Graph, heuristic: str = "min_fill") -> TreewidthBound:
    """Upper bound on treewidth from a greedy elimination ordering.

    Disconnected graphs are handled component-wise; ``num_components``
    reports how many there were.
    """
    graph = g.graph if isinstance(g, TNGraph) else g
    if graph.number_of_nodes() == 0:
        raise ValueError("empty graph")
    order = elimination_ordering(graph, heuristic)
    td = decomposition_from_ordering(graph, order)
    return TreewidthBound(
        bound=width(td),
        decomposition=td,
        ordering=tuple(order),
        num_components=nx.number_connected_components(graph),
    )


def exact_treewidth(g: TNGraph | nx.Graph, max_vertices: int = EXACT_TREEWIDTH_MAX_VERTICES) -> int:
    """Exact treewidth by dynamic programming over vertex subsets.

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v)
    is the set of vertices outside S + {v} reachable from v through S.
    Exponential; intended as a test oracle on small graphs.
    """
    graph = g.graph if isinstance(g, TNGraph) else g
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if n > max_vertices:
        raise ValueError(f"exact treewidth limited to {max_vertices} vertices, got {n}")
    if n == 0:
        return -1
    idx = {v: k for k, v in enumerate(nodes)}
    nbr = [0] * n
    for u, v in graph.edges:
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]

    def q_size(s: int, v: int) -> int:
        seen = 1 << v
        frontier = 1 << v
        reach = 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= nbr[low.bit_length() - 1]
                f ^= low
            nxt &= ~seen
            seen |= nxt
            reach |= nxt & ~s
            frontier = nxt & s
        return bin(reach).count("1")

    full = (1 << n) - 1
    tw = {0: -1}
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            s = 0
            for k in combo:
                s |= 1 << k
            best = n
            for v in combo:
                rest = s & ~(1 << v)
                val = max(tw[rest], q_size(rest, v))
                if val < best:
                    best = val
            tw[s] = best
        # subsets two sizes below are no longer needed
        if size >= 2:
            for combo in itertools.combinations(range(n), size - 2):
                s = 0
                for k in combo:
                    s |= 1 << k
                tw.pop(s, None)
    return tw[full]


def brute_force_treewidth(g: TNGraph | nx.Graph, max_vertices: int = 8) -> int:
    """Minimum elimination width over every vertex ordering (tiny graphs only)."""
    graph = g.graph if isinstance(g, TNGraph) else g
    if graph.number_of_nodes() > max_vertices:
        raise ValueError(f"brute force limited to {max_vertices} vertices")
    if graph.number_of_nodes() == 0:
        return -1
    return min(elimination_width(graph, p) for p in itertools.permutations(sorted(graph.nodes)))


# ---------------------------------------------------------------- reference example


def interferometer_example() -> tuple[TNGraph, TreeDecomposition]:
    """Four-mode, five-coupler interferometer and a width-4 decomposition.

    Couplers U1(1,2), U2(3,4), U3(2,3), U4(1,2), U5(3,4) act on four Fock
    inputs and end in four measurements. The decomposition puts all five
    couplers in a central bag and hangs every input/measurement off it.
    """
    tn = TNGraph()
    n_in = [tn.add_vertex("input", f"n{k}") for k in range(1, 5)]
    u = [tn.add_vertex("coupler", f"U{k}") for k in range(1, 6)]
    n_out = [tn.add_vertex("measurement", f"nbar{k}") for k in range(1, 5)]
    for a, b in [(0, 0), (1, 0), (2, 1), (3, 1)]:
        tn.add_edge(n_in[a], u[b], 2)
    for a, b in [(0, 3), (0, 2), (2, 3), (1, 2), (2, 4), (1, 4)]:
        tn.add_edge(u[a], u[b], 2)
    for a, b in [(3, 0), (3, 1), (4, 2), (4, 3)]:
        tn.add_edge(u[a], n_out[b], 2)

    bags = {0: frozenset(u)}
    tree = nx.Graph()
    tree.add_node(0)
    leaves = [(n_in[0], u[0]), (n_in[1], u[0]), (n_in[2], u[1]), (n_in[3], u[1])]
    leaves += [(u[3], n_out[0]), (u[3], n_out[1]), (u[4], n_out[2]), (u[4], n_out[3])]
    for k, pair in enumerate(leaves, start=1):
        bags[k] = frozenset(pair)
        tree.add_edge(0, k)
    return tn, TreeDecomposition(tree=tree, bags=bags)


# ---------------------------------------------------------------- cost model


@dataclass(frozen=True)
class CostEstimate:
    log_cost: float
    cls: str


def log_cost(num_couplers: int, total_photons: int, tw: int, coupler_exponent: float = COUPLER_EXPONENT) -> float:
    """ln of T**c1 * (M+1)**tw."""
    if num_couplers < 1 or total_photons < 1:
        raise ValueError("coupler count and photon count must be >= 1")
    return coupler_exponent * math.log(num_couplers) + tw * math.log(total_photons + 1)


def classify_family(points: Sequence[tuple[int, int]]) -> str:
    """Classify how treewidth grows with coupler count across a family.

    ``points`` are ``(T, tw)`` pairs for members of increasing size.
    Bounded treewidth is ``tractable``; power-law growth with log-log
    exponent >= HARD_GROWTH_EXPONENT is ``hard``; slower (logarithmic)
    growth is ``quasi-polynomial``.
    """
    pts = sorted((int(t), int(w)) for t, w in points)
    if len({t for t, _ in pts}) < 2:
        raise ValueError("a family needs members of at least two different sizes")
    tws = [w for _, w in pts]
    if max(tws) == min(tws):
        return "tractable"
    x = np.log([t for t, _ in pts])
    y = np.log([max(w, 1) for w in tws])
    exponent = float(np.polyfit(x, y, 1)[0])
    return "hard" if exponent >= HARD_GROWTH_EXPONENT else "quasi-polynomial"


def cost_estimate(
    num_couplers: int,
    total_photons: int,
    tw: int,
    family: Sequence[tuple[int, int]] | None = None,
) -> CostEstimate:
    """Contraction cost T**3 * (M+1)**tw and the family class.

    The class is a property of a family of ``(T, tw)`` points, which should
    include the instance itself when it belongs to the family. Without a
    family the class is ``"unclassified"``.
    """
    lc = log_cost(num_couplers, total_photons, tw)
    if family is None:
        return CostEstimate(lc, "unclassified")
    return CostEstimate(lc, classify_family(family))


def num_couplers(g: TNGraph) -> int:
    return sum(1 for _, kind in g.graph.nodes(data="kind") if kind == "coupler")


# ---------------------------------------------------------------- edge-list format


def write_edge_list(tn: TNGraph) -> str:
    """Header of vertex labels and open edges, then ``u v dim`` per edge."""
    lines = ["# tngraph v1", f"# vertices {tn.num_vertices}"]
    for v, data in sorted(tn.graph.nodes(data=True)):
        lines.append(f"# vertex {v} {data['kind']} {data['label']}")
    for v, label, dim in tn.open_edges:
        lines.append(f"# open {v} {label} {dim}")
    for u, v, dim in sorted((min(a, b), max(a, b), w) for a, b, w in tn.graph.edges(data="dim")):
        lines.append(f"{u} {v} {dim}")
    return "\n".join(lines) + "\n"


def read_edge_list(text: str) -> TNGraph:
    tn = TNGraph()
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "vertex":
                vid, kind, label = int(parts[1]), parts[2], " ".join(parts[3:])
                tn.graph.add_node(vid, kind=kind, label=label)
            elif parts and parts[0] == "open":
                tn.open_edges.append((int(parts[1]), parts[2], int(parts[3])))
            continue
        u, v, dim = line.split()
        edges.append((int(u), int(v), int(dim)))
    for u, v, dim in edges:
        if u not in tn.graph:
            tn.graph.add_node(u, kind="coupler", label=str(u))
        if v not in tn.graph:
            tn.graph.add_node(v, kind="coupler", label=str(v))
        tn.add_edge(u, v, dim)
    return tn
