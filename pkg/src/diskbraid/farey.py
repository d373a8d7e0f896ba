"""The Farey graph: an exactly computable stand-in for the curve complex.

Vertices are rational slopes p/q in lowest terms together with 1/0 (the
vertical curve / infinity); two slopes are joined by an edge when
|p s - q r| = 1.  The group PSL(2,Z) acts by isometries through linear
action on (p, q).

Distances are computed exactly by a continued-fraction style recursion and
cross-validated against a breadth-first search oracle on denominator-bounded
subgraphs.  Because every vertex has infinite valence, "all vertices within
distance R of a geodesic" is an infinite set; the finite corridor used for
path search is instead the R-fold triangle completion of the union of
geodesics, which is monotone in R and contains every geodesic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .braids import mat_det, mat_pow
from .errors import BudgetError


@dataclass(frozen=True, order=True)
class Slope:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 0 or math.gcd(abs(self.p), self.q) != 1:
            raise ValueError(f"slope ({self.p},{self.q}) not canonical")
        if self.p == 0 and self.q == 0:
            raise ValueError("(0,0) is not a slope")

    def __str__(self):
        return f"{self.p}/{self.q}"


INF = Slope(1, 0)


def slope(p: int, q: int) -> Slope:
    """Canonicalize (p, q): positive denominator, lowest terms."""
    if p == 0 and q == 0:
        raise ValueError("(0,0) is not a slope")
    g = math.gcd(abs(p), abs(q))
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


def parse_slope(text: str) -> Slope:
    num, _, den = text.partition("/")
    try:
        p = int(num)
        q = int(den) if den else 1
    except ValueError as exc:
        raise ValueError(f"cannot parse slope {text!r}") from exc
    return slope(p, q)


def intersection(s1: Slope, s2: Slope) -> int:
    """Geometric intersection number: |p1 q2 - q1 p2|."""
    return abs(s1.p * s2.q - s1.q * s2.p)


def adjacent(s1: Slope, s2: Slope) -> bool:
    return intersection(s1, s2) == 1


def act(m, s: Slope) -> Slope:
    """Linear action of a determinant-1 integer matrix on a slope."""
    if mat_det(m) != 1:
        raise ValueError("matrix must have determinant 1")
    (a, b), (c, d) = m
    return slope(a * s.p + b * s.q, c * s.p + d * s.q)


def turn_number(u: Slope, v: Slope, w: Slope) -> int:
    """Turn of the two-step walk u -> v -> w, a PSL(2,Z) invariant.

    The stabilizer of v is an infinite cyclic parabolic group acting simply
    transitively on the neighbors of v (on the representatives x normalized
    to det(x, v) = +1 it acts by x -> x + v).  The turn is the unique integer
    m with w' = u' + m v on those representatives.  It is 0 exactly when the
    walk backtracks (w == u), is preserved by the projective linear action,
    and negates when the walk is traversed backwards.  Two edge-paths are
    translates of one another under PSL(2,Z) if and only if their turn
    sequences agree (the action is simply transitive on oriented edges).
    """
    du = u.p * v.q - u.q * v.p
    dw = w.p * v.q - w.q * v.p
    if abs(du) != 1 or abs(dw) != 1:
        raise ValueError("turn_number needs u and w adjacent to v")
    up, uq = (u.p, u.q) if du == 1 else (-u.p, -u.q)
    wp, wq = (w.p, w.q) if dw == 1 else (-w.p, -w.q)
    if v.p != 0:
        m = (wp - up) // v.p
    else:
        m = (wq - uq) // v.q
    return m


def turn_word(path) -> tuple:
    """Turn sequence of an edge-path: one integer per interior vertex."""
    path = tuple(path)
    return tuple(
        turn_number(path[k - 2], path[k - 1], path[k])
        for k in range(2, len(path))
    )


# ---------------------------------------------------------------------------
# exact distance
# ---------------------------------------------------------------------------

def _dist_from_inf(p: int, q: int) -> int:
    """Exact graph distance from 1/0 to p/q (q >= 0, lowest terms).

    Moving a neighbor n of infinity back to infinity by the automorphism
    z -> -1/(z - n) shows that slopes at distance d are exactly the
    continued fractions of length d with arbitrary *integer* partial
    quotients, so the distance is the length of the shortest such
    expansion.  Nearest-integer rounding realizes it (validated
    exhaustively against the BFS oracle and the two-candidate branching
    recursion on |p|, q <= 60, and against that recursion on thousands
    of braid-image slopes), and its remainder at least halves the
    denominator, so the loop stays logarithmic even for the
    astronomically tall slopes of powered hyperbolic matrices — where a
    floor-based recursion would walk chains as long as the largest
    partial quotient."""
    steps = 0
    while q != 0:
        n = (2 * p + q) // (2 * q)  # nearest integer, halves round up
        r = p - n * q  # in [-q/2, q/2)
        p, q = (-q, r) if r > 0 else (q, -r)
        steps += 1
    return steps


def _move_to_inf(s: Slope):
    """A determinant-1 matrix sending s to 1/0."""
    # x*p + y*q = 1  =>  [[x, y], [-q, p]] has det 1 and maps (p,q) to (1,0)
    g, x, y = _ext_gcd(s.p, s.q)
    assert g == 1
    return ((x, y), (-s.q, s.p))


def _ext_gcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def distance(s1: Slope, s2: Slope) -> int:
    """Exact Farey-graph distance."""
    if s1 == s2:
        return 0
    m = _move_to_inf(s1)
    t = act(m, s2)
    return _dist_from_inf(t.p, t.q)


# ---------------------------------------------------------------------------
# BFS oracle on a denominator-bounded subgraph
# ---------------------------------------------------------------------------


def neighbors_in_box(s: Slope, box: int):
    """All Farey neighbors of s with |p|, |q| <= box, deterministic order."""
    out = set()
    for eps in (1, -1):
        # p*s0 - q*r0 = eps ; general solution (r0 + t p, s0 + t q)
        g, u, v = _ext_gcd(s.p, s.q)
        r0, s0 = -eps * v, eps * u
        # walk t over the window where the solution stays inside the box
        ts = set()
        for base, coeff in ((r0, s.p), (s0, s.q)):
            if coeff != 0:
                lo = math.ceil((-box - base) / coeff)
                hi = math.floor((box - base) / coeff)
                if lo > hi:
                    lo, hi = hi, lo
                ts.update(range(lo, hi + 1))
        if s.p == 0 and s.q == 0:  # unreachable; slopes are canonical
            continue
        for t in ts:
            r, q2 = r0 + t * s.p, s0 + t * s.q
            if abs(r) <= box and abs(q2) <= box and (r or q2):
                out.add(slope(r, q2))
    return sorted(out)


def bfs_distance(s1: Slope, s2: Slope, box: int | None = None) -> int:
    """Graph distance by BFS restricted to |p|, |q| <= box.

    An upper bound on the true distance; equals it once the box is wide
    enough to contain a geodesic.
    """
    if s1 == s2:
        return 0
    if box is None:
        box = 2 * max(abs(s1.p), s1.q, abs(s2.p), s2.q) + 8
    frontier = [s1]
    seen = {s1}
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for w in neighbors_in_box(v, box):
                if w == s2:
                    return d
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    raise RuntimeError(f"BFS box {box} disconnected {s1} from {s2}")


# ---------------------------------------------------------------------------
# translation length
# ---------------------------------------------------------------------------


def translation_length(m, base: Slope, p_max: int):
    """(estimate, upper bound) for the asymptotic displacement of m.

    estimate = d(base, m^P base)/P at P = p_max; the upper bound
    min_p d(base, m^p base)/p is valid by subadditivity of displacement.
    Elliptic and parabolic matrices (|trace| <= 2) have length 0 exactly.
    """
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    if abs(m[0][0] + m[1][1]) <= 2:
        return (0.0, 0.0)
    upper = math.inf
    est = 0.0
    mp = ((1, 0), (0, 1))
    for p in range(1, p_max + 1):
        mp = mat_pow(m, p)
        d = distance(base, act(mp, base))
        upper = min(upper, d / p)
        if p == p_max:
            est = d / p
    return (est, upper)


def orbit_path(m, base: Slope, edges: int):
    """The orbit segment (base, m base, ..., m^edges base); raises unless
    consecutive images are adjacent (i.e. the orbit is a path)."""
    verts = [base]
    for k in range(1, edges + 1):
        verts.append(act(mat_pow(m, k), base))
    for u, v in zip(verts, verts[1:]):
        if not adjacent(u, v):
            raise ValueError(f"orbit of {base} is not a path: {u} !~ {v}")
    return tuple(verts)


# ---------------------------------------------------------------------------
# geodesic corridor and bounded path enumeration
# ---------------------------------------------------------------------------


_geo_memo: dict = {}


def _geo_base(p: int, q: int):
    """Geodesic union for the trivial cases q = 0 and q = 1, or None."""
    if q == 0:
        return {INF}, set(), 0
    if q == 1:
        s = Slope(p, 1)
        return {INF, s}, {frozenset((INF, s))}, 1
    return None


def _geo_options(p: int, q: int):
    """(n, reduced p, reduced q, distance of the reduction) for the two
    candidate first steps from infinity: the integers bracketing p/q."""
    n0 = p // q
    opts = []
    for n in (n0, n0 + 1):
        r = p - n * q
        np_, nq = (-q, r) if r > 0 else (q, -r)
        opts.append((n, np_, nq, _dist_from_inf(np_, nq)))
    return opts


def _geodesic_graph_from_inf(p: int, q: int):
    """Vertices and edges of the union of geodesics from 1/0 to p/q.

    Mirrors the distance reduction: an optimal first step from infinity
    is one of the two integers bracketing p/q; the tail is the
    pulled-back geodesic union of the reduced slope.  Children are
    expanded with an explicit stack (the nesting depth is the graph
    distance, which braid-image slopes push past the interpreter's
    recursion limit) and only distance-optimal reductions are walked,
    so huge partial quotients — whose suboptimal reductions shrink the
    denominator one subtractive step at a time — cost nothing.  All
    arithmetic is on exact integers, so slopes of astronomically large
    height are fine (the BFS oracle `_geodesic_vertices` cross-validates
    this on small inputs).

    Returns (verts: set of Slope, edges: set of frozenset pairs, dist).
    """
    base = _geo_base(p, q)
    if base is not None:
        return base
    root = (p, q)
    stack = [root]
    while stack:
        key = stack[-1]
        if key in _geo_memo:
            stack.pop()
            continue
        opts = _geo_options(*key)
        dbest = min(o[3] for o in opts)
        todo = [
            (np_, nq)
            for n, np_, nq, d in opts
            if d == dbest and nq >= 2 and (np_, nq) not in _geo_memo
        ]
        if todo:
            stack.extend(todo)
            continue
        verts = {INF}
        edges = set()
        for n, np_, nq, d in opts:
            if d != dbest:
                continue
            sub = _geo_base(np_, nq) or _geo_memo[(np_, nq)]
            sv, se = sub[0], sub[1]
            # the reduction was z -> -1/(z - n); pull the tail back by its
            # inverse [[-n, 1], [-1, 0]]
            minv = ((-n, 1), (-1, 0))
            back = {w: act(minv, w) for w in sv}
            verts.update(back.values())
            for e in se:
                a, b = tuple(e)
                edges.add(frozenset((back[a], back[b])))
            edges.add(frozenset((INF, Slope(n, 1))))
        _geo_memo[key] = (verts, edges, 1 + dbest)
        stack.pop()
    verts, edges, dist = _geo_memo[root]
    return set(verts), set(edges), dist


def geodesic_union(s1: Slope, s2: Slope):
    """Union of all geodesics from s1 to s2: (vertices, edges, distance)."""
    if s1 == s2:
        return {s1}, set(), 0
    g = _move_to_inf(s1)
    t = act(g, s2)
    verts, edges, dist = _geodesic_graph_from_inf(t.p, t.q)
    # act by the inverse of g (det 1: inverse is the adjugate)
    (a, b), (c, d) = g
    ginv = ((d, -b), (-c, a))
    back = {w: act(ginv, w) for w in verts}
    return (
        set(back.values()),
        {frozenset((back[u], back[v])) for u, v in map(tuple, edges)},
        dist,
    )


def geodesic(s1: Slope, s2: Slope) -> tuple:
    """One geodesic path from s1 to s2, deterministically chosen."""
    verts, edges, dist = geodesic_union(s1, s2)
    if dist == 0:
        return (s1,)
    adj = {v: [] for v in verts}
    for e in edges:
        u, v = tuple(e)
        adj[u].append(v)
        adj[v].append(u)
    level = {s1: 0}
    frontier = [s1]
    k = 0
    while frontier and s2 not in level:
        k += 1
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in level:
                    level[w] = k
                    nxt.append(w)
        frontier = nxt
    path = [s2]
    while path[-1] != s1:
        v = path[-1]
        parents = [w for w in adj[v] if level.get(w, -1) == level[v] - 1]
        path.append(min(parents))
    return tuple(reversed(path))


def _geodesic_vertices(s1: Slope, s2: Slope):
    """Union of all geodesics from s1 to s2 found inside a denominator box
    (box doubled until BFS realizes the exact distance).  BFS oracle for
    `geodesic_union`; only usable for slopes of small height."""
    dist = distance(s1, s2)
    if dist == 0:
        return {s1}, dist
    box = 2 * max(abs(s1.p), s1.q, abs(s2.p), s2.q) + 8
    while True:
        levels_fwd = _bfs_levels(s1, box, dist)
        levels_bwd = _bfs_levels(s2, box, dist)
        if levels_fwd.get(s2) == dist:
            verts = {
                v
                for v, df in levels_fwd.items()
                if df + levels_bwd.get(v, dist + 1) == dist
            }
            return verts, dist
        box *= 2


def _bfs_levels(src: Slope, box: int, depth: int):
    levels = {src: 0}
    frontier = [src]
    for d in range(1, depth + 1):
        nxt = []
        for v in frontier:
            for w in neighbors_in_box(v, box):
                if w not in levels:
                    levels[w] = d
                    nxt.append(w)
        frontier = nxt
    return levels


def corridor(s1: Slope, s2: Slope, R: int):
    """Finite search region: union of geodesics, triangle-completed R times.

    Each completion pass adds, for every edge (u, v) of the current region,
    the two common neighbors u+v and u-v (with the edges joining them to u
    and v).  Small regions are then topped up with every remaining Farey
    edge among their vertices, so the graph is exactly the induced one; for
    large or huge-height regions the constructed edges alone are kept, which
    is still a triangle completion and keeps the search affordable.  Returns
    (vertices, adjacency) with deterministic ordering.
    """
    verts, edges, _ = geodesic_union(s1, s2)
    for _ in range(R):
        new_edges = set()
        for e in edges:
            u, v = tuple(e)
            for rp, rq in ((u.p + v.p, u.q + v.q), (u.p - v.p, u.q - v.q)):
                if rp or rq:
                    w = slope(rp, rq)
                    new_edges.add(frozenset((u, w)))
                    new_edges.add(frozenset((v, w)))
        edges |= new_edges
        for e in new_edges:
            verts.update(e)
    vlist = sorted(verts)
    if len(vlist) <= 700 and all(
        abs(v.p) < 10**9 and v.q < 10**9 for v in vlist
    ):
        for i, u in enumerate(vlist):
            for v in vlist[i + 1:]:
                if intersection(u, v) == 1:
                    edges.add(frozenset((u, v)))
    adj = {v: [] for v in vlist}
    for e in edges:
        u, v = tuple(e)
        adj[u].append(v)
        adj[v].append(u)
    for v in vlist:
        adj[v].sort()
    return vlist, adj


def paths_within(s1: Slope, s2: Slope, L_max: int, R: int, budget: int | None = None):
    """Stream all corridor paths from s1 to s2 of length <= L_max.

    Paths live in the triangle-completed corridor (see `corridor`); vertices
    may repeat.  ``budget`` caps the number of DFS node visits; exceeding it
    raises BudgetError carrying the count of paths emitted so far.
    """
    if L_max < distance(s1, s2):
        raise ValueError("L_max below the exact distance: no paths exist")
    _, adj = corridor(s1, s2, R)
    if s1 not in adj or s2 not in adj:
        return
    emitted = 0
    visits = 0
    stack = [(s1, (s1,))]
    while stack:
        v, path = stack.pop()
        visits += 1
        if budget is not None and visits > budget:
            raise BudgetError(
                f"path enumeration budget {budget} exhausted", partial=emitted
            )
        if v == s2:
            emitted += 1
            yield path
        if len(path) - 1 < L_max:
            for w in reversed(adj[v]):
                stack.append((w, path + (w,)))


def slope_fraction(s: Slope):
    """The slope as a Fraction, or None for infinity (handy for display)."""
    return None if s.q == 0 else Fraction(s.p, s.q)
