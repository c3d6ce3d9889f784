"""Closed-form bounds: Nash-Williams, growth-based isoperimetry, the
j-quantity resistance upper bounds, exponent functions, and the main-theorem
right-hand sides.

Implied multiplicative constants are never folded in: every evaluator
returns the formula value at constant 1, and BoundReport records the
empirical ratio so that sweeps can assert boundedness instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    BadArguments,
    DomainError,
    EmptyBoundary,
    InvalidCutsets,
    MissingParam,
    OutOfProfileRange,
    ProfileUnavailable,
    RadiusTooSmall,
    SizeCapExceeded,
)
from .graphs import (
    BallGraph,
    Graph,
    GrowthProfile,
    TerminalGraph,
    bfs_layers,
    boundary,
    graph_growth_profile,
    growth_profile,
)

BK_EXHAUSTIVE_CAP = 20


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """One (computed quantity, formula bound) comparison.

    ``ratio`` is computed/bound.  ``status`` is PASS/FAIL only when the
    inequality carries no implied constant; INFO rows feed sweep-level
    boundedness checks instead.
    """

    quantity: str
    computed: float
    bound: float
    side: str
    ratio: float
    params: dict
    status: str

    @property
    def passed(self) -> bool:
        return self.status != "FAIL"


def make_report(quantity: str, computed: float, bound: float, side: str,
                params: dict, check: bool = True) -> BoundReport:
    if side not in ("lower", "upper"):
        raise BadArguments(f"side must be lower or upper, got {side!r}")
    if bound != 0:
        ratio = computed / bound
    else:
        ratio = math.inf if computed > 0 else 1.0
    if not check:
        status = "INFO"
    elif side == "lower":
        status = "PASS" if bound <= computed * (1 + 1e-9) else "FAIL"
    else:
        status = "PASS" if computed <= bound * (1 + 1e-9) else "FAIL"
    return BoundReport(quantity=quantity, computed=computed, bound=bound,
                       side=side, ratio=ratio, params=dict(params), status=status)


# ---------------------------------------------------------------------------
# Nash-Williams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutsetFamily:
    """Pairwise disjoint edge sets, each separating source from ground."""

    cutsets: tuple[tuple[tuple[int, int, int], ...], ...]
    sizes: tuple[float, ...]
    graph: Graph
    source: tuple[int, ...]
    ground: tuple[int, ...]


def validate_cutsets(family: CutsetFamily) -> None:
    seen: set[tuple[int, int]] = set()
    adj = {}
    eu, ev, em = family.graph.edges
    for u, v, m in zip(eu, ev, em):
        adj[(int(u), int(v))] = int(m)
    for cutset in family.cutsets:
        pairs = set()
        for u, v, m in cutset:
            key = (min(u, v), max(u, v))
            if key not in adj:
                raise InvalidCutsets(f"edge {key} not present in the graph")
            if m != adj[key]:
                raise InvalidCutsets(f"edge {key} multiplicity mismatch")
            if key in pairs:
                raise InvalidCutsets(f"edge {key} repeated inside a cutset")
            pairs.add(key)
        if pairs & seen:
            raise InvalidCutsets("cutsets are not pairwise disjoint")
        seen |= pairs
        dist = bfs_layers(family.graph, family.source, banned_edges=pairs)
        if any(dist[g] >= 0 for g in family.ground):
            raise InvalidCutsets("a cutset fails to separate source from ground")


def nash_williams_bound(family: CutsetFamily, p: float, validate: bool = True) -> float:
    """(sum_i |Pi_i|^(-1/(p-1)))^(p-1), a lower bound for R_p(source <-> ground)."""
    if p <= 1:
        raise BadArguments("p must be > 1")
    if validate:
        validate_cutsets(family)
    q = 1.0 / (p - 1.0)
    return float(sum(s ** (-q) for s in family.sizes) ** (p - 1.0))


def sphere_cutsets(ball: BallGraph, r: int) -> CutsetFamily:
    """Edge boundaries of B(x,0),...,B(x,r-1): disjoint cutsets between x and S(x,r)."""
    if r < 1:
        raise BadArguments("r must be >= 1")
    if ball.radius < r:
        raise RadiusTooSmall(f"need ball radius >= {r}, have {ball.radius}")
    layer = ball.layer
    cutsets = []
    sizes = []
    for i in range(r):
        edges = []
        w = 0
        for u in ball.sphere_ids(i):
            nb, mu = ball.base.neighbors(int(u))
            up = layer[nb] == i + 1
            for v, m in zip(nb[up], mu[up]):
                edges.append((int(u), int(v), int(m)))
                w += int(m)
        cutsets.append(tuple(edges))
        sizes.append(float(w))
    return CutsetFamily(cutsets=tuple(cutsets), sizes=tuple(sizes),
                        graph=ball.base, source=(ball.center,),
                        ground=tuple(int(v) for v in ball.sphere_ids(r)))


# ---------------------------------------------------------------------------
# Growth-based isoperimetric bound
# ---------------------------------------------------------------------------

def diameter_resistance_lower(p: float, deg_u: int, diam: int, edge_total: int) -> float:
    """Cutset lower bound on R_p between two vertices at maximal distance.

    Built from the sphere cutsets around u: the first has deg(u) edges and
    at least half of the rest have at most 2(|E|-deg(u))/(diam-1) edges.
    The constant is explicit, so the bound is a genuine inequality.
    """
    if p <= 1:
        raise BadArguments("p must be > 1")
    if diam < 2 or edge_total <= deg_u:
        raise BadArguments("need diam >= 2 and more edges than deg(u)")
    q = 1.0 / (p - 1.0)
    head = (1.0 / deg_u) ** q
    tail = ((diam - 1.0) ** p / (4.0 * (edge_total - deg_u))) ** q
    return (head + tail) ** (p - 1.0)


def csc_bound(profile: GrowthProfile, m: int) -> float:
    """Lower bound m / (12 * phi(2m)) on the vertex boundary of any m-set.

    phi is the growth inverse: the least radius whose ball holds the given
    volume.  Valid for m at most half the ambient size.
    """
    if m < 1:
        raise BadArguments("set size must be >= 1")
    if 2 * m > profile.beta[-1]:
        raise OutOfProfileRange(
            f"need beta up to {2 * m}, profile reaches {profile.beta[-1]}")
    return m / (12.0 * profile.phi(2 * m))


# ---------------------------------------------------------------------------
# The j-quantity and the resistance upper bound built from it
# ---------------------------------------------------------------------------

def j_quantity(g: Graph, A, p: float, ambient_degree: Optional[int] = None) -> float:
    """min of the vertex- and edge-boundary expressions driving the upper bound.

    ``ambient_degree`` overrides deg(Gamma) when g is a truncated piece of a
    larger graph.
    """
    if p <= 1:
        raise BadArguments("p must be > 1")
    info = boundary(g, A)
    if info.vertex_size == 0 or info.edge_size == 0:
        raise EmptyBoundary("set has empty boundary")
    deg = ambient_degree if ambient_degree is not None else g.max_degree
    a = len(set(int(x) for x in A))
    q1 = p / (p - 1.0)
    q2 = 1.0 / (p - 1.0)
    vterm = a / info.vertex_size ** q1 + 1.0 / info.vertex_size ** q2
    eterm = deg * a / info.edge_size ** q1 + 1.0 / info.edge_size ** q2
    return float(min(vterm, eterm))


def j_upper_from_profile(a: int, xi: float, p: float) -> float:
    """Upper bound on j for sets of size a with vertex boundary >= xi.

    Uses the two-term comparison with C = max(1, xi/a), so it is valid for
    any positive xi.
    """
    if xi <= 0:
        raise BadArguments("boundary lower bound must be positive")
    c = max(1.0, xi / a)
    return (1.0 + c) * a / xi ** (p / (p - 1.0))


def connected_supersets(nbr_masks: list[int], root: int, allowed: int):
    """Yield every connected vertex set (as a bitmask) containing root.

    Rooted variant of the exclusive-neighbourhood enumeration: each set is
    produced exactly once.
    """
    root_bit = 1 << root
    if not (allowed & root_bit):
        return

    def rec(s: int, ns: int, ext: int):
        yield s
        while ext:
            w_bit = ext & -ext
            ext &= ext - 1
            w = w_bit.bit_length() - 1
            grown = nbr_masks[w] & allowed & ~s & ~ns & ~ext
            yield from rec(s | w_bit, ns | nbr_masks[w], ext | grown)

    yield from rec(root_bit, nbr_masks[root], nbr_masks[root] & allowed & ~root_bit)


def _bit_ids(mask: int) -> list[int]:
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask &= mask - 1
    return out


def _is_simple_cycle(g: Graph) -> bool:
    return (g.n >= 3 and np.all(g.degree == 2) and np.all(g.mult == 1)
            and int((bfs_layers(g, [0]) >= 0).sum()) == g.n)


class BkBound(NamedTuple):
    value: float
    base: float
    block_maxima: tuple[float, ...]


def _dyadic_block(total: int, a: int) -> int:
    """Block index n with total/2^(n+1) < a <= total/2^n."""
    return int(math.floor(math.log2(total / a)))


def _blocks_exhaustive_rooted(measure_graph: Graph, nbr_masks: list[int], root: int,
                              allowed: int, total: int, nmax: int, p: float,
                              ambient_degree: Optional[int]) -> list[float]:
    maxima = [0.0] * (nmax + 1)
    for s in connected_supersets(nbr_masks, root, allowed):
        a = s.bit_count()
        if a > total:
            continue
        n = _dyadic_block(total, a)
        if n < 0 or n > nmax:
            continue
        j = j_quantity(measure_graph, _bit_ids(s), p, ambient_degree=ambient_degree)
        if j > maxima[n]:
            maxima[n] = j
    return maxima


def _blocks_cycle_arcs(g: Graph, u: int, v: int, total: int, nmax: int,
                       p: float) -> list[float]:
    """On a cycle every connected proper subset is an arc; enumerate them."""
    order = [u]
    prev = -1
    while len(order) < g.n:
        nb, _ = g.neighbors(order[-1])
        nxt = int(nb[0]) if int(nb[0]) != prev else int(nb[1])
        prev = order[-1]
        order.append(nxt)
    pos_v = order.index(v)
    n_ = g.n
    maxima = [0.0] * (nmax + 1)
    for size in range(1, n_ - 1):
        n = _dyadic_block(total, size)
        if n < 0 or n > nmax:
            continue
        for start in range(-size + 1, 1):
            idxs = [(start + k) % n_ for k in range(size)]
            if pos_v in [i % n_ for i in range(start, start + size)]:
                continue
            arc = [order[i] for i in idxs]
            j = j_quantity(g, arc, p)
            if j > maxima[n]:
                maxima[n] = j
            break  # arcs of equal size share boundary sizes on a cycle
    return maxima


def _blocks_from_profile(xi_of: Callable[[int], float], total: int, nmax: int,
                         p: float) -> list[float]:
    maxima = [0.0] * (nmax + 1)
    for n in range(nmax + 1):
        lo = total / 2 ** (n + 1)
        hi = total / 2 ** n
        a_lo = int(math.floor(lo)) + 1
        a_hi = int(math.floor(hi))
        if a_hi < a_lo:
            continue
        count = a_hi - a_lo + 1
        if count <= 4096:
            sizes = range(a_lo, a_hi + 1)
        else:
            grid = np.unique(np.geomspace(a_lo, a_hi, 257).astype(np.int64))
            sizes = [int(a) for a in grid]
        best = 0.0
        for a in sizes:
            val = j_upper_from_profile(a, xi_of(a), p)
            if val > best:
                best = val
        maxima[n] = best
    return maxima


def bk_upper_bound(problem, p: float, strategy: str = "exhaustive",
                   boundary_profile: Optional[Callable[[int], float]] = None) -> BkBound:
    """Right-hand side (implied constant 1) of the connected-set resistance
    upper bound.

    ``problem`` is either a (BallGraph, r) pair, bounding
    R_p(x <-> S(x, r+1)) through subsets of B(x, r), or a TerminalGraph with
    singleton terminals in a finite graph.  ``strategy`` selects exhaustive
    connected-subset enumeration (small graphs; arcs on cycles) or a
    minimum-boundary profile source: ``boundary_profile`` (size -> lower
    bound on the vertex boundary) when given, otherwise the growth-based
    bound.  The caller pairs the result with a measured resistance and
    reports the empirical ratio.
    """
    if p <= 1:
        raise BadArguments("p must be > 1")
    if strategy not in ("exhaustive", "profile"):
        raise BadArguments(f"unknown strategy {strategy!r}")

    if isinstance(problem, tuple):
        ball, r = problem
        if ball.radius < r + 1:
            raise RadiusTooSmall("need ball radius >= r+1 so boundaries stay visible")
        if ball.beta(r + 1) == ball.beta(r):
            raise BadArguments("B(x,r) already covers the graph, its boundary is empty")
        total = ball.beta(r)
        deg_u = ball.spec.ambient_degree()
        nmax = int(math.floor(math.log2(total / deg_u))) if total >= deg_u else -1
        base = deg_u ** (-1.0 / (p - 1.0))
        if nmax < 0:
            return BkBound((base) ** (p - 1.0), base, ())
        if strategy == "exhaustive":
            if total > BK_EXHAUSTIVE_CAP:
                raise SizeCapExceeded(
                    f"exhaustive strategy capped at {BK_EXHAUSTIVE_CAP} vertices")
            allowed = (1 << total) - 1
            nbr_masks = _masks_prefix(ball.base, total)
            maxima = _blocks_exhaustive_rooted(ball.base, nbr_masks, ball.center,
                                               allowed, total, nmax, p,
                                               ambient_degree=deg_u)
        else:
            xi_of = boundary_profile or _csc_profile_fn(ball, total)
            maxima = _blocks_from_profile(xi_of, total, nmax, p)
        value = (base + sum(maxima)) ** (p - 1.0)
        return BkBound(value, base, tuple(maxima))

    if isinstance(problem, TerminalGraph):
        g = problem.graph
        u, v = problem.source, problem.ground
        total = g.n
        deg_u = int(g.degree[u])
        deg_v = int(g.degree[v])
        base = deg_u ** (-1.0 / (p - 1.0)) + deg_v ** (-1.0 / (p - 1.0))
        all_maxima: list[float] = []
        for root, other, deg_root in ((u, v, deg_u), (v, u, deg_v)):
            nmax = int(math.floor(math.log2(total / deg_root))) if total >= deg_root else -1
            nmax = min(nmax, _dyadic_block(total, 1))
            if nmax < 1:
                continue
            if strategy == "exhaustive":
                if _is_simple_cycle(g):
                    maxima = _blocks_cycle_arcs(g, root, other, total, nmax, p)
                elif total > BK_EXHAUSTIVE_CAP:
                    raise SizeCapExceeded(
                        f"exhaustive strategy capped at {BK_EXHAUSTIVE_CAP} vertices")
                else:
                    allowed = ((1 << total) - 1) & ~(1 << other)
                    nbr_masks = _masks_prefix(g, total)
                    maxima = _blocks_exhaustive_rooted(g, nbr_masks, root, allowed,
                                                       total, nmax, p, None)
            else:
                xi_of = boundary_profile or _csc_profile_fn_graph(g)
                maxima = _blocks_from_profile(xi_of, total, nmax, p)
            all_maxima.extend(maxima[1:])  # the pair form sums blocks from n = 1
        value = (base + sum(all_maxima)) ** (p - 1.0)
        return BkBound(value, base, tuple(all_maxima))

    raise BadArguments("problem must be (BallGraph, r) or a TerminalGraph")


def _masks_prefix(g: Graph, m: int) -> list[int]:
    masks = [0] * m
    for v in range(m):
        nb, _ = g.neighbors(v)
        acc = 0
        for w in nb:
            if w < m:
                acc |= 1 << int(w)
        masks[v] = acc
    return masks


def _csc_profile_fn(ball: BallGraph, total: int) -> Callable[[int], float]:
    profile = growth_profile(ball)
    if profile.beta[-1] < 2 * total:
        raise ProfileUnavailable(
            f"growth profile reaches {profile.beta[-1]}, need {2 * total}")
    ambient = ball.spec.ambient_size()
    if ambient is not None and 2 * total > ambient:
        raise ProfileUnavailable("sets may exceed half the ambient graph")
    return lambda a: csc_bound(profile, a)


def _csc_profile_fn_graph(g: Graph) -> Callable[[int], float]:
    # Blocks in the two-terminal form start at n = 1, so only sizes up to
    # n/2 are ever queried; csc_bound rejects anything larger.
    profile = graph_growth_profile(g)
    return lambda a: csc_bound(profile, a)


# ---------------------------------------------------------------------------
# Exponent functions
# ---------------------------------------------------------------------------

class ExponentValues(NamedTuple):
    alpha: float
    h: float
    h_star: float
    b: float


def alpha_exponent(p: float) -> float:
    if p <= 1:
        raise DomainError("p must be > 1")
    return 1.0 if p < 3 else 1.0 - p / (math.floor(p) + 1.0)


def homogeneous_dimension(d: int) -> int:
    """Largest homogeneous dimension of a nilpotent Lie group of dimension d."""
    if d < 0:
        raise DomainError("d must be >= 0")
    return 0 if d < 1 else 1 + d * (d - 1) // 2


def h_star(p: float) -> int:
    if p <= 0:
        raise DomainError("p must be positive")
    return homogeneous_dimension(math.ceil(p) - 1)


def b_exponent(q: float) -> float:
    if q < 0:
        raise DomainError("q must be >= 0")
    if q <= 3 or q == 4:
        return float(q)
    d = 1
    while homogeneous_dimension(d) <= q:
        d += 1
    return float(d)  # max d with h(d-1) <= q


def exponent_functions(p: float, q: float, d: int) -> ExponentValues:
    return ExponentValues(alpha=alpha_exponent(p),
                          h=float(homogeneous_dimension(d)),
                          h_star=float(h_star(p)),
                          b=b_exponent(q))


def growth_lower_rhs(n: int, r: int, q: float, beta_1: Optional[int] = None) -> float:
    """Growth lower-bound formula (implied constant 1) for beta(n).

    With ``beta_1`` absent this is the absolute form under beta(r) >= r^q:
    n^(floor(q)+1) below the crossover n = r^{q - floor(q)} and
    r^{q-floor(q)} * n^floor(q) above it.  With ``beta_1`` it is the
    relative form under beta(r) >= r^q * beta(1): n^b(q) * beta(1).
    """
    if not 1 <= n <= r:
        raise DomainError("need 1 <= n <= r")
    if q < 1:
        raise DomainError("need q >= 1")
    if beta_1 is not None:
        return n ** b_exponent(q) * beta_1
    fq = math.floor(q)
    crossover = r ** (q - fq)
    if n <= crossover:
        return float(n ** (fq + 1))
    return crossover * n ** fq


def linear_growth_lower(n: int, degree: int) -> float:
    """(degree+1) * n / 3, a ball-volume lower bound valid up to the radius
    of any connected regular graph (explicit constant, no hidden factor)."""
    if n < 1 or degree < 1:
        raise DomainError("need n >= 1 and degree >= 1")
    return (degree + 1) * n / 3.0


# ---------------------------------------------------------------------------
# Main-theorem right-hand sides
# ---------------------------------------------------------------------------

def _get(params: dict, *keys):
    out = []
    for k in keys:
        if k not in params:
            raise MissingParam(f"theorem formula needs parameter {k!r}")
        out.append(params[k])
    return out if len(out) > 1 else out[0]


def _case_formulas(p: float, deg: float, q: float, bulk: float, bulk_log: float,
                   eps: Optional[float]) -> float:
    """Shared case analysis of the two upper-bound propositions.

    ``bulk`` is diam^p/|G| (finite form) or r^p/beta(r) (ball form);
    ``bulk_log`` the same with the (log .../deg)^(p-1) factor.
    """
    fp = math.floor(p)
    eta_exp = 1.0 - p / (fp + 1.0)
    integer_p = (p == int(p))
    candidates = []
    if q >= fp + 1:
        candidates.append(deg ** (-eta_exp))
    if fp <= q < fp + 1:
        candidates.append(deg ** (-eta_exp) + bulk_log)
        if not integer_p:
            candidates.append(deg ** (-eta_exp) + bulk)
    if q <= p:
        candidates.append(1.0 / deg + bulk_log)
    if q < fp and not integer_p:
        candidates.append(bulk)
    if eps is not None and q <= p - eps:
        candidates.append(bulk)
    if not candidates:
        raise DomainError(f"no upper-bound case applies for p={p}, q={q}")
    return min(candidates)


def theorem_rhs(theorem: str, params: dict) -> float:
    """Evaluate a main-theorem bound formula with implied constant 1.

    Logarithms are natural throughout; base changes are absorbed by the
    implied constants and show up only in reported ratios.
    """
    if theorem in ("T1_8_lower", "T1_8_upper"):
        r, beta_r, deg = _get(params, "r", "beta_r", "deg")
        if theorem == "T1_8_lower":
            return 1.0 / deg + r * r / (deg * beta_r)
        return 1.0 / deg + r * r * math.log(r) / beta_r

    if theorem in ("T1_10_lower", "T1_10_upper_int", "T1_10_upper_nonint"):
        p, r, beta_r, deg = _get(params, "p", "r", "beta_r", "deg")
        if theorem == "T1_10_lower":
            return 1.0 / deg + r ** p / (deg * beta_r)
        head = deg ** (-alpha_exponent(p))
        if theorem == "T1_10_upper_int":
            return head + r ** p * math.log(r) ** (p - 1.0) / beta_r
        return head + r ** p / beta_r

    if theorem == "T1_11":
        p, diam, size, deg = _get(params, "p", "diam", "size", "deg")
        return deg ** (-alpha_exponent(p)) + diam ** p * math.log(size) ** (p - 1.0) / size

    if theorem == "T1_12":
        p, r, beta_r = _get(params, "p", "r", "beta_r")
        return r ** p / beta_r

    if theorem == "T1_13":
        p, diam, size = _get(params, "p", "diam", "size")
        return diam ** p / size

    if theorem == "T_var_converse":
        n, r, beta_n, deg = _get(params, "n", "r", "beta_n", "deg")
        if not 0 < n < r:
            raise DomainError("need 0 < n < r")
        return n * n * math.log(r / n) / (deg * beta_n)

    if theorem == "P7_2_cases":
        p, deg, diam, size = _get(params, "p", "deg", "diam", "size")
        q = math.inf if diam <= 1 else math.log(size) / math.log(diam)
        bulk = diam ** p / size
        bulk_log = bulk * math.log(size / deg) ** (p - 1.0)
        return _case_formulas(p, deg, q, bulk, bulk_log, params.get("eps"))

    if theorem == "P7_4_cases":
        p, deg, r, beta_r, beta_4r = _get(params, "p", "deg", "r", "beta_r", "beta_4r")
        q = math.log(beta_4r) / math.log(4 * r)
        bulk = r ** p / beta_r
        bulk_log = bulk * math.log(beta_r / deg) ** (p - 1.0)
        return _case_formulas(p, deg, q, bulk, bulk_log, params.get("eps"))

    raise BadArguments(f"unknown theorem {theorem!r}")


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x), for sweep regressions."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if len(lx) < 2:
        raise BadArguments("need at least two points")
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))
