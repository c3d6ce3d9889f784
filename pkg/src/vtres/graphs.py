"""Abelian Cayley graphs, metric balls, and boundary primitives.

Everything downstream (the potential solver, walk simulation, bound
evaluators) consumes the types built here: finite Cayley graphs of products
of cyclic groups, truncated metric balls of possibly infinite such groups,
and two-terminal networks obtained by collapsing vertex sets.

Vertex identity is deterministic everywhere: finite Cayley graphs number
vertices by the lexicographic rank of the group tuple, balls by
(layer, lexicographic tuple).  Adjacency is stored CSR-style with integer
multiplicities so that terminal collapsing is exact.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    BadArguments,
    DisconnectedGeneratingSet,
    EmptySet,
    FullSet,
    InfiniteFactorPresent,
    OutOfProfileRange,
    RadiusTooSmall,
    SizeCapExceeded,
)

# Module token for an infinite (Z) factor in a GraphSpec.
INFINITE = None

DEFAULT_SIZE_CAP = 5_000_000

FAMILIES = ("torus_product", "cyclic_chords", "z_times_torus", "explicit")


# ---------------------------------------------------------------------------
# GraphSpec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphSpec:
    """Declarative description of an abelian Cayley-graph family.

    ``factors`` lists the cyclic moduli, with ``None`` standing for an
    infinite Z factor.  ``generators`` is a tuple of atoms, each one of

    * ``("box", (i, j, ...))``      -- offsets {-1,0,1} on the listed factors,
    * ``("full", i)``               -- every nonzero element of factor i,
    * ``("chords", k)``             -- offsets {-k,...,k} on factor 0,
    * ``("boxfull", (i, ...), f)``  -- the product set: a box offset on the
      listed factors combined with an arbitrary element of finite factor f,
    * ``("explicit", offsets)``     -- explicit tuple of offset tuples.

    The union of the atoms, canonicalized and with the identity dropped,
    is the generating set.  The box/full union and the boxfull product give
    different metrics on the same group: a full-factor step costs its own
    move in the former and rides along with a box step in the latter.
    """

    family: str
    factors: tuple[Optional[int], ...]
    generators: tuple[tuple, ...]
    radius: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadArguments(f"unknown family {self.family!r}")
        if not self.factors:
            raise BadArguments("spec needs at least one factor")
        for f in self.factors:
            if f is not None and f < 2:
                raise BadArguments(f"finite modulus must be >= 2, got {f}")
        # Eagerly canonicalize so malformed generator atoms fail at build time.
        offsets = spec_offsets(self)
        if not offsets:
            raise BadArguments("generating set is empty after dropping identity")

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def is_finite(self) -> bool:
        return all(f is not None for f in self.factors)

    def ambient_size(self) -> Optional[int]:
        if not self.is_finite:
            return None
        size = 1
        for f in self.factors:
            size *= f
        return size

    def ambient_degree(self) -> int:
        return len(spec_offsets(self))


def _canonical(offset: Sequence[int], factors: Sequence[Optional[int]]) -> tuple[int, ...]:
    return tuple(x if m is None else x % m for x, m in zip(offset, factors))


def _negate(offset: Sequence[int], factors: Sequence[Optional[int]]) -> tuple[int, ...]:
    return tuple(-x if m is None else (-x) % m for x, m in zip(offset, factors))


def spec_offsets(spec: GraphSpec) -> tuple[tuple[int, ...], ...]:
    """Canonical sorted generating set of ``spec`` as group-element offsets.

    Identity offsets are dropped; symmetry (closure under negation) is
    enforced, which is automatic for box/full/chords atoms and checked for
    explicit ones.
    """
    d = spec.dim
    factors = spec.factors
    offs: set[tuple[int, ...]] = set()
    for atom in spec.generators:
        kind = atom[0]
        if kind == "box":
            idxs = atom[1] if len(atom) > 1 and atom[1] is not None else tuple(range(d))
            if any(i < 0 or i >= d for i in idxs):
                raise BadArguments(f"box atom index out of range: {atom}")
            ranges = [(-1, 0, 1) if i in idxs else (0,) for i in range(d)]
            stack = [()]
            for r in ranges:
                stack = [t + (v,) for t in stack for v in r]
            offs.update(_canonical(t, factors) for t in stack)
        elif kind == "full":
            i = atom[1]
            if i < 0 or i >= d or factors[i] is None:
                raise BadArguments(f"full atom needs a finite factor index: {atom}")
            base = [0] * d
            for v in range(1, factors[i]):
                t = list(base)
                t[i] = v
                offs.add(tuple(t))
        elif kind == "chords":
            k = atom[1]
            if d != 1 or factors[0] is None:
                raise BadArguments("chords atom requires a single finite factor")
            if k < 1:
                raise BadArguments("chords width must be >= 1")
            for v in range(-k, k + 1):
                offs.add(_canonical((v,), factors))
        elif kind == "boxfull":
            idxs, f = atom[1], atom[2]
            if f < 0 or f >= d or factors[f] is None:
                raise BadArguments(f"boxfull atom needs a finite fiber factor: {atom}")
            if f in idxs or any(i < 0 or i >= d for i in idxs):
                raise BadArguments(f"boxfull atom has bad box indices: {atom}")
            ranges = [(-1, 0, 1) if i in idxs else (0,) for i in range(d)]
            ranges[f] = tuple(range(factors[f]))
            stack = [()]
            for r in ranges:
                stack = [t + (v,) for t in stack for v in r]
            offs.update(_canonical(t, factors) for t in stack)
        elif kind == "explicit":
            for t in atom[1]:
                if len(t) != d:
                    raise BadArguments(f"offset {t} has wrong dimension")
                offs.add(_canonical(t, factors))
        else:
            raise BadArguments(f"unknown generator atom {atom!r}")
    offs.discard(tuple(0 for _ in range(d)))
    for t in offs:
        if _negate(t, factors) not in offs:
            raise BadArguments(f"generating set is not symmetric: missing -{t}")
    return tuple(sorted(offs))


# Spec factories for the standard families.

def spec_torus(*moduli: int, full_last: bool = False) -> GraphSpec:
    """(Z/n_1 Z) + ... + (Z/n_d Z) with box generators.

    With ``full_last`` the final factor contributes all its nonzero
    elements instead of joining the box (the sharpness-example shape).
    """
    if full_last:
        gens = (("box", tuple(range(len(moduli) - 1))), ("full", len(moduli) - 1))
    else:
        gens = (("box", tuple(range(len(moduli)))),)
    return GraphSpec("torus_product", tuple(moduli), gens)


def spec_fibered_torus(*moduli: int) -> GraphSpec:
    """Torus product whose final factor rides along with every box step.

    Generators are the product set {-1,0,1}^(d-1) x (Z/kZ), so the last
    factor is free in the metric and beta(r) = min((2r+1)^(d-1), n^(d-1))*k
    for r >= 1.
    """
    last = len(moduli) - 1
    if last < 1:
        raise BadArguments("need at least one box factor before the fiber")
    return GraphSpec("torus_product", tuple(moduli),
                     (("boxfull", tuple(range(last)), last),))


def spec_cycle(n: int) -> GraphSpec:
    return spec_torus(n)


def spec_cyclic_chords(n: int, k: int) -> GraphSpec:
    return GraphSpec("cyclic_chords", (n,), (("chords", k),))


def spec_z_times_torus(*moduli: int) -> GraphSpec:
    factors = (INFINITE,) + tuple(moduli)
    return GraphSpec("z_times_torus", factors, (("box", tuple(range(len(factors)))),))


def spec_line() -> GraphSpec:
    return spec_z_times_torus()


def spec_lattice(d: int) -> GraphSpec:
    """Z^d with box generators (ball construction only)."""
    factors = tuple(INFINITE for _ in range(d))
    return GraphSpec("explicit", factors, (("box", tuple(range(d))),))


def spec_explicit(factors: Sequence[Optional[int]], offsets: Sequence[Sequence[int]],
                  radius: Optional[int] = None) -> GraphSpec:
    return GraphSpec("explicit", tuple(factors),
                     (("explicit", tuple(tuple(t) for t in offsets)),), radius)


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected multigraph in CSR form.

    ``indptr``/``nbr``/``mult`` store, for every vertex, the sorted list of
    neighbours with positive integer multiplicities.  Self-loops are never
    stored; symmetry (with matching multiplicities) is a construction
    invariant.
    """

    n: int
    indptr: np.ndarray
    nbr: np.ndarray
    mult: np.ndarray

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.nbr[lo:hi], self.mult[lo:hi]

    @cached_property
    def degree(self) -> np.ndarray:
        """Weighted degree per vertex."""
        out = np.zeros(self.n, dtype=np.int64)
        np.add.at(out, np.repeat(np.arange(self.n), np.diff(self.indptr)), self.mult)
        return out

    @cached_property
    def max_degree(self) -> int:
        return int(self.degree.max()) if self.n else 0

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Each undirected edge once, as arrays (u, v, mult) with u < v."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = rows < self.nbr
        return rows[keep], self.nbr[keep], self.mult[keep]

    @property
    def edge_weight_total(self) -> int:
        return int(self.edges[2].sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.nbr, other.nbr)
                and np.array_equal(self.mult, other.mult))

    def __hash__(self):
        return hash((self.n, self.nbr.tobytes(), self.mult.tobytes()))


def from_edge_list(n: int, edges: Iterable[tuple[int, int, int]]) -> Graph:
    """Build a Graph from (u, v, mult) triples, merging parallel entries."""
    eu, ev, em = [], [], []
    for u, v, m in edges:
        if u == v:
            raise BadArguments("self-loops are not allowed")
        if not (0 <= u < n and 0 <= v < n):
            raise BadArguments(f"edge ({u},{v}) out of range for n={n}")
        if m <= 0:
            raise BadArguments("edge multiplicity must be positive")
        eu.append(u), ev.append(v), em.append(m)
        eu.append(v), ev.append(u), em.append(m)
    if not eu:
        return Graph(n, np.zeros(n + 1, dtype=np.int64),
                     np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    em = np.asarray(em, dtype=np.int64)
    order = np.lexsort((ev, eu))
    eu, ev, em = eu[order], ev[order], em[order]
    # merge duplicate (u, v) pairs
    newpair = np.ones(len(eu), dtype=bool)
    newpair[1:] = (eu[1:] != eu[:-1]) | (ev[1:] != ev[:-1])
    idx = np.cumsum(newpair) - 1
    mm = np.zeros(idx[-1] + 1, dtype=np.int64)
    np.add.at(mm, idx, em)
    uu, vv = eu[newpair], ev[newpair]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, uu + 1, 1)
    indptr = np.cumsum(indptr)
    return Graph(n, indptr, vv, mm)


def validate_graph(g: Graph) -> None:
    """Check symmetry, positive multiplicities, and the no-self-loop rule."""
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    if np.any(rows == g.nbr):
        raise BadArguments("graph has a self-loop")
    if np.any(g.mult <= 0):
        raise BadArguments("graph has a non-positive multiplicity")
    fwd = {(int(u), int(v)): int(m) for u, v, m in zip(rows, g.nbr, g.mult)}
    for (u, v), m in fwd.items():
        if fwd.get((v, u)) != m:
            raise BadArguments(f"asymmetric adjacency at ({u},{v})")


def bfs_layers(g: Graph, sources: Iterable[int],
               banned_edges: Optional[set[tuple[int, int]]] = None) -> np.ndarray:
    """Distances from a source set; -1 marks unreachable vertices.

    ``banned_edges`` is a set of normalized (min, max) pairs treated as
    deleted, used by cutset-separation checks.
    """
    dist = np.full(g.n, -1, dtype=np.int64)
    frontier = sorted(set(int(s) for s in sources))
    for s in frontier:
        dist[s] = 0
    d = 0
    while frontier:
        nxt = []
        for u in frontier:
            lo, hi = g.indptr[u], g.indptr[u + 1]
            for v in g.nbr[lo:hi]:
                v = int(v)
                if dist[v] >= 0:
                    continue
                if banned_edges is not None and (min(u, v), max(u, v)) in banned_edges:
                    continue
                dist[v] = d + 1
                nxt.append(v)
        frontier = nxt
        d += 1
    return dist


# ---------------------------------------------------------------------------
# Cayley graph and ball construction
# ---------------------------------------------------------------------------

def build_cayley_graph(spec: GraphSpec, size_cap: int = DEFAULT_SIZE_CAP) -> Graph:
    """Finite Cayley graph of ``spec``; vertex ids are lexicographic tuple ranks."""
    if not spec.is_finite:
        raise InfiniteFactorPresent("build_cayley_graph needs all factors finite")
    dims = tuple(int(f) for f in spec.factors)
    n = spec.ambient_size()
    if n > size_cap:
        raise SizeCapExceeded(f"{n} vertices exceeds cap {size_cap}")
    offsets = spec_offsets(spec)
    deg = len(offsets)
    coords = np.stack(np.unravel_index(np.arange(n), dims), axis=1)
    nbrs = np.empty((n, deg), dtype=np.int64)
    for j, s in enumerate(offsets):
        shifted = (coords + np.asarray(s, dtype=np.int64)) % np.asarray(dims, dtype=np.int64)
        nbrs[:, j] = np.ravel_multi_index(tuple(shifted.T), dims)
    nbrs.sort(axis=1)
    indptr = np.arange(0, (n + 1) * deg, deg, dtype=np.int64)
    g = Graph(n, indptr, nbrs.reshape(-1).copy(), np.ones(n * deg, dtype=np.int64))
    if int((bfs_layers(g, [0]) >= 0).sum()) != n:
        raise DisconnectedGeneratingSet(f"generators do not generate the group: {spec}")
    return g


@dataclass(frozen=True, eq=False)
class BallGraph:
    """Induced subgraph on the metric ball B(x, radius) of ``spec``'s graph.

    Vertex 0 is the center; ids are sorted by (layer, lexicographic tuple),
    so every ball B(x, r) with r <= radius is an id prefix.  ``exit_degree``
    counts ambient edges leaving the ball (nonzero only on the top layer).
    """

    spec: GraphSpec
    base: Graph
    center: int
    radius: int
    layer: np.ndarray
    exit_degree: np.ndarray
    coords: tuple[tuple[int, ...], ...]

    def beta(self, r: int) -> int:
        """Ball volume at radius r (number of ids with layer <= r)."""
        if r < 0:
            return 0
        return int(np.searchsorted(self.layer, r, side="right"))

    def sphere_ids(self, r: int) -> np.ndarray:
        return np.arange(self.beta(r - 1), self.beta(r), dtype=np.int64)


def build_ball(spec: GraphSpec, radius: int, size_cap: int = DEFAULT_SIZE_CAP) -> BallGraph:
    """BFS ball of ``spec``'s Cayley graph around the identity."""
    if radius < 0:
        raise BadArguments("radius must be >= 0")
    offsets = spec_offsets(spec)
    factors = spec.factors
    d = spec.dim

    def step(t: tuple[int, ...], s: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(a + b if m is None else (a + b) % m
                     for a, b, m in zip(t, s, factors))

    origin = tuple(0 for _ in range(d))
    seen: set[tuple[int, ...]] = {origin}
    layers: list[list[tuple[int, ...]]] = [[origin]]
    for _ in range(radius):
        nxt: set[tuple[int, ...]] = set()
        for t in layers[-1]:
            for s in offsets:
                w = step(t, s)
                if w not in seen:
                    nxt.add(w)
        if not nxt:
            break  # graph exhausted below the requested radius
        seen.update(nxt)
        if len(seen) > size_cap:
            raise SizeCapExceeded(f"ball exceeds size cap {size_cap}")
        layers.append(sorted(nxt))

    coords: list[tuple[int, ...]] = []
    layer_arr: list[int] = []
    index: dict[tuple[int, ...], int] = {}
    for l, members in enumerate(layers):
        for t in members:
            index[t] = len(coords)
            coords.append(t)
            layer_arr.append(l)
    n = len(coords)

    indptr = np.zeros(n + 1, dtype=np.int64)
    nbr_rows: list[list[int]] = []
    exit_degree = np.zeros(n, dtype=np.int64)
    for i, t in enumerate(coords):
        row = []
        ex = 0
        for s in offsets:
            j = index.get(step(t, s))
            if j is None:
                ex += 1
            else:
                row.append(j)
        row.sort()
        nbr_rows.append(row)
        exit_degree[i] = ex
        indptr[i + 1] = indptr[i] + len(row)
    nbr = np.fromiter((j for row in nbr_rows for j in row), dtype=np.int64,
                      count=int(indptr[-1]))
    base = Graph(n, indptr, nbr, np.ones(int(indptr[-1]), dtype=np.int64))
    return BallGraph(spec=spec, base=base, center=0, radius=radius,
                     layer=np.asarray(layer_arr, dtype=np.int64),
                     exit_degree=exit_degree, coords=tuple(coords))


# ---------------------------------------------------------------------------
# Growth profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthProfile:
    """Ball and sphere cardinalities beta(0..R), sigma(0..R)."""

    beta: tuple[int, ...]
    sigma: tuple[int, ...]
    degree: int
    diameter: Optional[int] = None

    @property
    def radius(self) -> int:
        return len(self.beta) - 1

    def phi(self, xi: float) -> int:
        """Smallest r with beta(r) >= xi (the growth inverse)."""
        for r, b in enumerate(self.beta):
            if b >= xi:
                return r
        raise OutOfProfileRange(f"profile only reaches beta={self.beta[-1]} < {xi}")


def growth_profile(ball: BallGraph) -> GrowthProfile:
    """Growth data of the ambient graph read off a ball."""
    sigma = np.bincount(ball.layer, minlength=ball.radius + 1)
    beta = np.cumsum(sigma)
    degree = ball.spec.ambient_degree()
    if ball.radius >= 1 and int(beta[1]) - 1 != degree:
        raise BadArguments("ball layer structure disagrees with generating set")
    diameter = None
    total = ball.spec.ambient_size()
    if total is not None and int(beta[-1]) == total:
        diameter = int(np.max(np.nonzero(sigma)[0]))
    return GrowthProfile(beta=tuple(int(b) for b in beta),
                         sigma=tuple(int(s) for s in sigma),
                         degree=degree, diameter=diameter)


def graph_growth_profile(g: Graph, center: int = 0) -> GrowthProfile:
    """Growth profile of a finite connected graph from BFS at ``center``."""
    dist = bfs_layers(g, [center])
    if np.any(dist < 0):
        raise BadArguments("graph is not connected")
    diameter = int(dist.max())
    sigma = np.bincount(dist, minlength=diameter + 1)
    beta = np.cumsum(sigma)
    return GrowthProfile(beta=tuple(int(b) for b in beta),
                         sigma=tuple(int(s) for s in sigma),
                         degree=int(beta[1]) - 1 if diameter >= 1 else 0,
                         diameter=diameter)


# ---------------------------------------------------------------------------
# Boundaries
# ---------------------------------------------------------------------------

class BoundaryInfo(NamedTuple):
    vertex_size: int
    edge_size: int
    vertex_set: tuple[int, ...]


def boundary(g: Graph, A: Iterable[int]) -> BoundaryInfo:
    """External vertex boundary and (multiplicity-weighted) edge boundary of A."""
    ids = sorted(set(int(a) for a in A))
    if not ids:
        raise EmptySet("boundary of the empty set is undefined")
    if ids[0] < 0 or ids[-1] >= g.n:
        raise BadArguments("vertex id out of range")
    if len(ids) == g.n:
        raise FullSet("boundary of the full vertex set is undefined")
    in_a = np.zeros(g.n, dtype=bool)
    in_a[ids] = True
    bset: set[int] = set()
    ecount = 0
    for u in ids:
        nb, mu = g.neighbors(u)
        outside = ~in_a[nb]
        ecount += int(mu[outside].sum())
        bset.update(int(v) for v in nb[outside])
    return BoundaryInfo(len(bset), ecount, tuple(sorted(bset)))


# ---------------------------------------------------------------------------
# Two-terminal problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TerminalGraph:
    """A Graph with a designated source and ground vertex."""

    graph: Graph
    source: int
    ground: int
    label: str = ""

    def __eq__(self, other) -> bool:
        if not isinstance(other, TerminalGraph):
            return NotImplemented
        return (self.graph == other.graph and self.source == other.source
                and self.ground == other.ground)

    def __hash__(self):
        return hash((self.graph, self.source, self.ground))


def dirichlet_problem(ball: BallGraph, r: int, mode: str = "sphere") -> TerminalGraph:
    """Two-terminal network for R_p(x <-> S(x, r+1)) = R_p(x <-> complement of B(x, r)).

    ``mode`` selects the construction route: "sphere" grounds the collapsed
    sphere S(x, r+1), "complement" grounds everything outside B(x, r).  The
    layer invariant makes the two produce identical graphs, which the tests
    assert as equality of outputs.
    """
    if mode not in ("sphere", "complement"):
        raise BadArguments(f"unknown mode {mode!r}")
    if r < 0:
        raise BadArguments("r must be >= 0")
    if ball.radius < r + 1:
        raise RadiusTooSmall(f"need ball radius >= {r + 1}, have {ball.radius}")
    m = ball.beta(r)
    ground = m
    edges: list[tuple[int, int, int]] = []
    ground_mult = np.zeros(m, dtype=np.int64)
    for u in range(m):
        nb, mu = ball.base.neighbors(u)
        for v, k in zip(nb, mu):
            v = int(v)
            if v < m:
                if v > u:
                    edges.append((u, v, int(k)))
            else:
                if mode == "sphere" and ball.layer[v] != r + 1:
                    raise BadArguments("layer invariant violated: edge jumps a sphere")
                ground_mult[u] += int(k)
    for u in range(m):
        if ground_mult[u]:
            edges.append((u, ground, int(ground_mult[u])))
    g = from_edge_list(m + 1, edges)
    return TerminalGraph(g, source=ball.center, ground=ground,
                         label=f"dirichlet(r={r}, mode={mode})")


def collapse_terminals(g: Graph, source: Iterable[int], ground: Iterable[int],
                       label: str = "") -> TerminalGraph:
    """Collapse two disjoint vertex sets into single terminals.

    Free vertices keep their relative order and are renumbered 0..f-1; the
    source terminal becomes vertex f and the ground terminal f+1.  Edges
    inside a terminal set vanish; parallel edges accumulate multiplicity.
    """
    src = set(int(v) for v in source)
    gnd = set(int(v) for v in ground)
    if not src or not gnd:
        raise EmptySet("terminal sets must be nonempty")
    if src & gnd:
        raise BadArguments("source and ground sets must be disjoint")
    for v in src | gnd:
        if not (0 <= v < g.n):
            raise BadArguments("terminal vertex out of range")
    free = [v for v in range(g.n) if v not in src and v not in gnd]
    remap = {v: i for i, v in enumerate(free)}
    s_id, g_id = len(free), len(free) + 1
    for v in src:
        remap[v] = s_id
    for v in gnd:
        remap[v] = g_id
    eu, ev, em = g.edges
    edges = []
    for u, v, m in zip(eu, ev, em):
        a, b = remap[int(u)], remap[int(v)]
        if a == b:
            continue
        edges.append((a, b, int(m)))
    ng = from_edge_list(len(free) + 2, edges)
    return TerminalGraph(ng, source=s_id, ground=g_id, label=label)


def annulus_problem(ball: BallGraph, n: int, r: int) -> TerminalGraph:
    """Two-terminal network for R_p(S(x,n) <-> S(x,r)) read off a ball.

    Vertices strictly inside B(x, n-1) stay free; they attach only to the
    source sphere, take the source value in the minimizer, and contribute
    zero energy, so the collapsed problem is exact.
    """
    if not (0 < n < r):
        raise BadArguments("need 0 < n < r")
    if ball.radius < r:
        raise RadiusTooSmall(f"need ball radius >= {r}, have {ball.radius}")
    m = ball.beta(r)
    sub = _prefix_subgraph(ball.base, m)
    return collapse_terminals(
        sub,
        source=range(ball.beta(n - 1), ball.beta(n)),
        ground=range(ball.beta(r - 1), m),
        label=f"annulus(n={n}, r={r})",
    )


def _prefix_subgraph(g: Graph, m: int) -> Graph:
    """Induced subgraph on vertices 0..m-1 (valid because balls are id prefixes)."""
    eu, ev, em = g.edges
    keep = (eu < m) & (ev < m)
    return from_edge_list(m, zip(eu[keep].tolist(), ev[keep].tolist(), em[keep].tolist()))
