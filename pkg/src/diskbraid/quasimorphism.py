"""Counting quasimorphisms on the Farey graph.

For an oriented edge-path omega (non-backtracking, no self-overlap) and an
integer weight 0 < W < |omega|,

    c_{omega,W}(alpha, beta) = d(alpha, beta) - inf_sigma(|sigma| - W |sigma|_omega)

where sigma ranges over paths from alpha to beta and |sigma|_omega is the
maximal number of non-overlapping copies of omega in sigma.  A *copy* is a
subpath that is a PSL(2,Z)-translate of omega — the group acts simply
transitively on oriented edges, so a subpath is a translate of omega exactly
when its turn sequence (see `farey.turn_number`) equals omega's.  Copies
must be edge-disjoint; consecutive copies may share a vertex, which leaves
one unconstrained turn between their turn blocks.

psi_omega(g) = c_{omega,W}(alpha, g alpha) - c_{omega^{-1},W}(alpha, g alpha)
is a quasimorphism; its homogenization is what the rest of the package
integrates over braids.  Taking omega on the axis of a hyperbolic element
makes the homogenization nonzero there while parabolic and elliptic elements
always homogenize to zero (their orbits stay at bounded distance).

The infimum is taken exactly over walks in the triangle-completed geodesic
corridor of radius R (see `farey.corridor`).  The optimum is a dynamic
program over (directed corridor edge, matcher state, walk length): turns are
consumed by a KMP automaton over the turn alphabet; completing a copy
rewards -W and enters a skip state that consumes the junction turn.  Greedy
earliest-completion packing is maximal (earliest-finish interval
scheduling), so the automaton's eager accepts are exact.  Any walk longer
than L_max = ceil(d / (1 - W/|omega|)) costs more than a geodesic and cannot
attain the infimum, which bounds the DP depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import farey
from .braids import mat_mul, mat_pow
from .farey import Slope

# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaSpec:
    omega: tuple  # tuple of Slopes, a non-backtracking path
    W: int = 1

    def __post_init__(self):
        omega = tuple(self.omega)
        object.__setattr__(self, "omega", omega)
        L = len(omega) - 1
        if L < 2:
            raise ValueError("omega must have at least 2 edges")
        for u, v in zip(omega, omega[1:]):
            if not farey.adjacent(u, v):
                raise ValueError(f"omega is not a path: {u} !~ {v}")
        if not 0 < self.W < L:
            raise ValueError(f"need 0 < W < |omega| (W={self.W}, |omega|={L})")
        turns = farey.turn_word(omega)
        if any(t == 0 for t in turns):
            raise ValueError("omega must not backtrack")
        object.__setattr__(self, "turns", turns)
        for k in range(1, L):
            if omega[: k + 1] == omega[L - k:]:
                raise ValueError(
                    f"omega has a self-overlap of length {k}; "
                    "copy counting requires none"
                )

    @property
    def length(self) -> int:
        return len(self.omega) - 1

    def reversed(self) -> "OmegaSpec":
        return OmegaSpec(tuple(reversed(self.omega)), self.W)


@dataclass(frozen=True)
class QmSpec:
    """Finite linear combination sum_i a_i * psi_{omega_i}, with base alpha."""

    terms: tuple  # tuple of (coefficient, OmegaSpec)
    base: Slope

    def __post_init__(self):
        terms = tuple((float(a), spec) for a, spec in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("QmSpec needs at least one term")
        for a, _ in terms:
            if not math.isfinite(a):
                raise ValueError("coefficients must be finite")

    @property
    def coefficient_norm(self) -> float:
        return sum(abs(a) for a, _ in self.terms)


@dataclass(frozen=True)
class QmValue:
    value: float
    error: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.error >= 0):
            raise ValueError("bad QmValue")


# ---------------------------------------------------------------------------
# copy counting
# ---------------------------------------------------------------------------


def copies_count(sigma, omega) -> int:
    """Maximal number of non-overlapping copies of omega in sigma.

    Copies are PSL(2,Z)-translates of omega occurring as subpaths; they may
    not share an edge but may share a vertex.  Greedy earliest-completion
    scanning over the turn word is exact (earliest-finish scheduling of
    fixed-length blocks).
    """
    sigma = tuple(sigma)
    omega = tuple(omega)
    if len(sigma) < len(omega):
        return 0
    pattern = farey.turn_word(omega)
    stream = farey.turn_word(sigma)
    auto = _PatternAutomaton(pattern)
    count = 0
    state = 0
    i = 0
    while i < len(stream):
        state = auto.step(state, stream[i])
        i += 1
        if state == auto.accept:
            count += 1
            state = 0
            i += 1  # the junction turn cannot feed the next copy
    return count


# ---------------------------------------------------------------------------
# KMP automaton over the turn alphabet
# ---------------------------------------------------------------------------


class _PatternAutomaton:
    def __init__(self, pattern):
        self.pattern = tuple(pattern)
        n = len(self.pattern)
        fail = [0] * (n + 1)
        k = 0
        for i in range(1, n):
            while k and self.pattern[i] != self.pattern[k]:
                k = fail[k]
            if self.pattern[i] == self.pattern[k]:
                k += 1
            fail[i + 1] = k
        self.fail = fail
        self.accept = n
        self._trans = {}

    def step(self, state: int, ch) -> int:
        key = (state, ch)
        hit = self._trans.get(key)
        if hit is not None:
            return hit
        k = state
        while k and (k == self.accept or self.pattern[k] != ch):
            k = self.fail[k]
        if k < self.accept and self.pattern[k] == ch:
            k += 1
        self._trans[key] = k
        return k


# ---------------------------------------------------------------------------
# the counting value, exact over the corridor
# ---------------------------------------------------------------------------

_c_omega_memo: dict = {}


def c_omega(alpha: Slope, beta: Slope, spec: OmegaSpec, R: int = 2):
    """Exact corridor value of c_{omega,W}(alpha, beta) at radius R.

    Monotone nondecreasing in R; always within [0, d(alpha, beta)].

    The optimum over corridor walks is a dynamic program on (directed edge,
    matcher state, walk length).  Walking edge (u -> v) then (v -> w) reads
    the turn t(u, v, w); completing omega's turn block rewards -W and enters
    a skip state for the junction turn.  The arrays are laid out flat over
    (edge, state) and each step is a grouped scatter-min, so the long walks
    produced by high-translation matrices stay affordable.
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    key = (alpha, beta, spec.omega, spec.W, R)
    hit = _c_omega_memo.get(key)
    if hit is not None:
        return hit
    d = farey.distance(alpha, beta)
    if d == 0:
        _c_omega_memo[key] = 0
        return 0
    W = spec.W
    L_max = math.ceil(d / (1.0 - W / spec.length))
    vlist, adj = farey.corridor(alpha, beta, R)
    auto = _PatternAutomaton(spec.turns)
    Lp = auto.accept  # pattern length in turns = |omega| - 1
    SKIP = Lp  # post-copy state: consume the junction turn
    S = Lp + 1

    # directed edges
    eindex = {}
    e_dst = []
    for u in vlist:
        for v in adj[u]:
            eindex[(u, v)] = len(e_dst)
            e_dst.append(v)

    # edge pairs (u -> v) -> (v -> w) with their turns, mapped to a small
    # turn alphabet
    pair_src = []
    pair_dst = []
    pair_turn = []
    turn_ids = {}
    for v in vlist:
        nbrs = adj[v]
        for u in nbrs:
            ein = eindex[(u, v)]
            for w in nbrs:
                t = farey.turn_number(u, v, w)
                tid = turn_ids.setdefault(t, len(turn_ids))
                pair_src.append(ein)
                pair_dst.append(eindex[(v, w)])
                pair_turn.append(tid)
    pair_src = np.asarray(pair_src, dtype=np.int64)
    pair_dst = np.asarray(pair_dst, dtype=np.int64)
    pair_turn = np.asarray(pair_turn, dtype=np.int64)

    # matcher tables over (state, turn id)
    n_turns = len(turn_ids)
    trans = np.zeros((S, n_turns), dtype=np.int64)
    accept = np.zeros((S, n_turns), dtype=bool)
    for t, tid in turn_ids.items():
        for s in range(Lp):
            s2 = auto.step(s, t)
            if s2 == auto.accept:
                accept[s, tid] = True
                s2 = SKIP
            trans[s, tid] = s2
        trans[SKIP, tid] = 0  # junction turn consumed without matching

    # flat transition arrays over (pair, state)
    Tp = trans[:, pair_turn].T  # (P, S)
    Ap = accept[:, pair_turn].T  # (P, S)
    n_pairs = len(pair_src)
    flat_from = (np.repeat(pair_src, S) * S
                 + np.tile(np.arange(S), n_pairs))
    flat_to = (pair_dst[:, None] * S + Tp).ravel()
    step_cost = (1.0 - W * Ap).ravel()

    # group the scatter-min by destination once; every step reuses the order
    order = np.argsort(flat_to, kind="stable")
    flat_from = flat_from[order]
    flat_to = flat_to[order]
    step_cost = step_cost[order]
    starts = np.flatnonzero(
        np.r_[True, flat_to[1:] != flat_to[:-1]])
    group_cell = flat_to[starts]

    n_edges = len(e_dst)
    INF = math.inf
    cost = np.full(n_edges * S, INF)
    for w in adj[alpha]:
        cost[eindex[(alpha, w)] * S] = 1.0  # state 0, one edge walked
    beta_cells = np.flatnonzero(
        np.asarray([v == beta for v in e_dst]))
    beta_cells = (beta_cells[:, None] * S + np.arange(S)).ravel()

    best = cost[beta_cells].min() if len(beta_cells) else INF
    for _ in range(L_max - 1):
        cand = cost[flat_from] + step_cost
        mins = np.minimum.reduceat(cand, starts)
        cost = np.full(n_edges * S, INF)
        cost[group_cell] = mins
        b = cost[beta_cells].min()
        if b < best:
            best = b
        if W <= 1 and cost.min() >= best:
            break  # steps cannot decrease cost when W <= 1
    out = int(round(d - best))
    _c_omega_memo[key] = out
    return out


def c_omega_bruteforce(alpha: Slope, beta: Slope, spec: OmegaSpec, R: int = 2):
    """Reference value by explicit path enumeration (small inputs only)."""
    d = farey.distance(alpha, beta)
    if d == 0:
        return 0
    L_max = math.ceil(d / (1.0 - spec.W / spec.length))
    best = math.inf
    for path in farey.paths_within(alpha, beta, L_max, R):
        cost = (len(path) - 1) - spec.W * copies_count(path, spec.omega)
        best = min(best, cost)
    return d - best


def psi_omega(m, spec: OmegaSpec, R: int = 2, base: Slope | None = None):
    """psi_omega(m) = c_{omega}(alpha, m alpha) - c_{omega^{-1}}(alpha, m alpha).

    The base alpha defaults to the first vertex of omega (the path is
    normally taken on the axis of the element under study)."""
    alpha = spec.omega[0] if base is None else base
    beta = farey.act(m, alpha)
    return c_omega(alpha, beta, spec, R) - c_omega(alpha, beta, spec.reversed(), R)


def qm_value(qm: QmSpec, m, R: int = 2) -> float:
    """Evaluate a linear combination of counting quasimorphisms at m."""
    return sum(a * psi_omega(m, spec, R, base=qm.base) for a, spec in qm.terms)


# ---------------------------------------------------------------------------
# homogenization and defect
# ---------------------------------------------------------------------------


def homogenize(eval_fn, x, P_max: int, power=None, defect: float = 0.0) -> QmValue:
    """Truncated homogenization value eval(x^P)/P with the standard error
    bound defect/P.  ``power`` defaults to integer matrix powers."""
    if P_max < 1:
        raise ValueError("P_max must be >= 1")
    pw = mat_pow if power is None else power
    value = eval_fn(pw(x, P_max)) / P_max
    return QmValue(value=float(value), error=float(defect) / P_max)


def psi_omega_homog(m, spec: OmegaSpec, R: int = 2, P_max: int = 16,
                    defect: float = 0.0, base: Slope | None = None) -> QmValue:
    return homogenize(
        lambda mp: psi_omega(mp, spec, R, base=base), m, P_max, defect=defect
    )


def defect_estimate(eval_fn, sampler, trials: int, seed: int) -> float:
    """Empirical lower bound on the defect: max over sampled pairs of
    |eval(a) - eval(ab) + eval(b)|.  ``sampler(rng)`` must return (a, b, ab).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a, b, ab = sampler(rng)
        worst = max(worst, abs(eval_fn(a) - eval_fn(ab) + eval_fn(b)))
    return worst


def matrix_pair_sampler(max_len: int = 8, max_power: int = 1):
    """Random pairs of PSL(2,Z) elements as words in the two standard
    parabolic generators; returns (a, b, ab) triples.

    With ``max_power > 1`` each letter is raised to a random exponent up
    to that bound.  Plain letter words almost never contain the long runs
    that produce large continued-fraction quotients, so patterns built
    from large turns sample a defect of exactly zero without this; power
    blocks reach them directly."""
    gens = [((1, 1), (0, 1)), ((1, 0), (1, 1))]
    gens += [((1, -1), (0, 1)), ((1, 0), (-1, 1))]
    if max_power < 1:
        raise ValueError("max_power must be >= 1")

    def sample_word(rng):
        m = ((1, 0), (0, 1))
        for _ in range(int(rng.integers(1, max_len + 1))):
            g = gens[int(rng.integers(0, len(gens)))]
            if max_power > 1:
                g = mat_pow(g, int(rng.integers(1, max_power + 1)))
            m = mat_mul(m, g)
        return m

    def sampler(rng):
        a, b = sample_word(rng), sample_word(rng)
        return a, b, mat_mul(a, b)

    return sampler


def single_turn_pattern(t: int, W: int = 1) -> OmegaSpec:
    """The 2-edge pattern (1/0, 0/1, w) whose single interior turn is t.

    The shortest patterns there are; their counting quasimorphisms see
    every geodesic vertex where the turn equals t exactly."""
    if t == 0:
        raise ValueError("turn 0 is a backtrack, not a pattern")
    w = Slope(1, t) if t > 0 else Slope(-1, -t)
    return OmegaSpec((farey.INF, Slope(0, 1), w), W=W)


def turn_band_qm(turns, base: Slope | None = None, W: int = 1) -> QmSpec:
    """Unit-coefficient sum of single-turn patterns over a band of turns.

    Conjugacy classes arriving from a Monte-Carlo stream are not known
    in advance, so a broad band — every turn from -4 down to -30, say —
    responds to whatever winding geometry the sampled axes actually
    traverse, where any single pattern would miss most classes.
    Mirror-image bands satisfy psi_{(-t)} = -psi_{(t)}, so a band and its
    reflection carry the same information up to sign."""
    turns = tuple(int(t) for t in turns)
    if not turns:
        raise ValueError("need at least one turn")
    terms = tuple((1.0, single_turn_pattern(t, W)) for t in turns)
    return QmSpec(terms, base=farey.INF if base is None else base)


def axis_segment(m, edges: int = 3, base: Slope | None = None) -> tuple:
    """An omega candidate: ``edges`` consecutive geodesic edges taken from
    the axis regime of a hyperbolic matrix (the natural Bestvina–Fujiwara
    choice).

    The middle of a long geodesic from ``base`` toward ``m^K . base`` runs
    along the invariant axis, where the turn word is periodic; slicing
    there keeps endpoint effects out of the pattern.  Turn words are
    PSL(2,Z)-invariant, so the segment matches along the axis of anything
    conjugate to ``m`` as well.
    """
    if edges < 1:
        raise ValueError("need at least one edge")
    (a, b), (c, d) = m
    if abs(a + d) <= 2:
        raise ValueError("axis_segment needs a hyperbolic matrix")
    base = farey.INF if base is None else base
    want = edges + 6
    K = 4
    while True:
        beta = farey.act(mat_pow(m, K), base)
        if farey.distance(base, beta) >= want:
            break
        K *= 2
        if K > 1 << 14:  # pragma: no cover - |tr| > 2 moves every base
            raise farey.BudgetError("orbit advances too slowly for a segment")
    path = farey.geodesic(base, beta)
    start = (len(path) - 1 - edges) // 2
    return tuple(path[start : start + edges + 1])