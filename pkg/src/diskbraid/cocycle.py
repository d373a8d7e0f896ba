"""From disk dynamics to braid words.

Moving a configuration of n marked points along an isotopy sweeps out a
geometric braid; projecting onto an axis and recording each exchange of
neighbours (with its sign read off the transverse coordinate) turns that
braid into a word in the Artin generators.  The braid attached to a map f
and a configuration x is

    gamma(f; x)  =  conn(f(x), z) . [trajectory of x under f] . conn(z, x)

read right-to-left (rightmost factor acts first), where z is a fixed base
configuration and conn(a, b) is the straight-line connector braid from a
to b.  Connectors are traced in a canonical orientation (the
lexicographically smaller endpoint first) and the reverse direction is
defined as the letter-wise inverse word, which makes conn(a, b) and
conn(b, a) exact inverses; as a consequence the cocycle identity

    gamma(f then g; x)  =  gamma(g; f(x)) . gamma(f; x)

holds at the level of words after free cancellation, not merely up to
braid equivalence.

Connector motion is sequential: point 1 traverses its straight segment
while the others stand still, then point 2, and so on.  This mirrors the
ordered composition of per-point push maps that the connector braid stands
in for; it is *not* in general the same braid as moving all points
simultaneously, so the order is part of the contract.

Crossing sign convention: at an exchange, the crossing is positive when the
formerly-left point (smaller axis coordinate) passes at smaller transverse
coordinate — a full counterclockwise rotation of two points gives the word
sigma_1^2 with writhe +2.

Tracing is grid-based with bisection refinement.  Each stage of the motion
is evaluated in closed form at arbitrary times (the primitive flows are
autonomous and connectors are linear), so refinement never accumulates
integration error.  A trace is accepted only when runs at dt and dt/2 agree
letter-for-letter; near-coincident projections raise DegeneracyError (the
caller retries with a rotated axis), near-coincident points raise
CollisionError, and traces that fail to stabilise raise ResolutionError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import braids
from .braids import BraidWord, concat, free_reduce, inverse
from .dynamics import DiskMap, _as_points, compose
from .errors import (
    BudgetError,
    CollisionError,
    DegeneracyError,
    ResolutionError,
)

AXIS_NUDGE = 0.618  # radians; applied once when a projection is degenerate
DEGEN_TOL = 1e-10
NEAR_TOL = 1e-8  # transverse gap below which a crossing counts as near-degenerate
COLLISION_TOL = 1e-12
_BISECT_TOL = 1e-14
_MAX_SPLIT_DEPTH = 64

_SPEEDS = {
    "uniform": lambda s: s,
    "smoothstep": lambda s: s * s * (3.0 - 2.0 * s),
}


@dataclass(frozen=True)
class TraceOptions:
    """Knobs of the tracing kernel.

    connector_speed reparametrizes segment time (any monotone warp visits
    the same configurations in the same order, so the braid word is
    unchanged; the knob exists so the parametrization is explicit, not
    implicit)."""

    dt_init: float = 1.0 / 256
    max_refine: int = 6
    axis_angle: float = 0.0
    connector_speed: str = "uniform"

    def __post_init__(self):
        if not self.dt_init > 0:
            raise ValueError("dt_init must be positive")
        if self.max_refine < 1:
            raise ValueError("max_refine must be at least 1")
        if self.connector_speed not in _SPEEDS:
            raise ValueError(
                f"unknown connector_speed {self.connector_speed!r}; "
                f"choose from {sorted(_SPEEDS)}"
            )


@dataclass(frozen=True)
class TraceResult:
    """Extracted braid plus how hard the tracer had to work for it."""

    word: BraidWord
    refinements_used: int
    degenerate_events: int

    def to_json(self) -> dict:
        return {
            "braid": list(self.word.letters),
            "refinements": self.refinements_used,
            "degenerate_events": self.degenerate_events,
        }


def base_config(n: int, radius: float = 0.5, phase: float = 0.37) -> np.ndarray:
    """Regular n-gon used as the base configuration z."""
    if n < 2:
        raise ValueError("need at least 2 marked points")
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])


@dataclass(frozen=True)
class Trace:
    """Letters of one traced motion, in time order (first crossing first)."""

    n: int
    letters_time: tuple
    axis_angle: float
    dt: float
    refinements: int
    start: np.ndarray
    end: np.ndarray
    degenerate_events: int = 0
    path: np.ndarray | None = None  # (T, n, 2) when recorded
    times: np.ndarray | None = None

    @property
    def word(self) -> BraidWord:
        """The braid word (rightmost letter acts first in time)."""
        return BraidWord(self.n, tuple(reversed(self.letters_time)))


# ---------------------------------------------------------------------------
# stages: anything that can report positions at a local time s in [0, 1]
# ---------------------------------------------------------------------------


class _FlowStage:
    """One primitive's flow acting on a batch of configurations."""

    def __init__(self, prim):
        self.prim = prim

    def bind(self, start):
        start = np.asarray(start, dtype=float)
        B, n, _ = start.shape
        prim = self.prim

        def ev(s, rows=None):
            block = start if rows is None else start[rows]
            flat = block.reshape(-1, 2)
            if s == 0.0:
                return block.copy()
            if s == 1.0:
                moved = prim.apply(flat)
            else:
                moved = prim.scaled(s).apply(flat)
            return moved.reshape(block.shape)

        return ev


class _LerpStage:
    """Straight-line motion of all points toward per-sample targets."""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=float)

    def bind(self, start):
        start = np.asarray(start, dtype=float)
        target = self.target
        if target.ndim == 2:
            target = np.broadcast_to(target, start.shape)

        def ev(s, rows=None):
            a = start if rows is None else start[rows]
            b = target if rows is None else target[rows]
            return (1.0 - s) * a + s * b

        return ev


class _SegmentStage:
    """Straight-line motion of a single marked point; the rest stand still.

    A connector is a chain of these, one per point in index order."""

    def __init__(self, target, index: int, speed: str = "uniform"):
        self.target = np.asarray(target, dtype=float)
        self.index = index
        self.speed = speed
        self.warp = _SPEEDS[speed]

    def bind(self, start):
        start = np.asarray(start, dtype=float)
        target = self.target
        if target.ndim == 2:
            target = np.broadcast_to(target, start.shape)
        i = self.index
        warp = self.warp

        def ev(s, rows=None):
            a = start if rows is None else start[rows]
            b = target if rows is None else target[rows]
            out = a.copy()
            t = warp(s)
            out[:, i, :] = (1.0 - t) * a[:, i, :] + t * b[:, i, :]
            return out

        return ev


# ---------------------------------------------------------------------------
# the tracing kernel
# ---------------------------------------------------------------------------


def _check_collisions(P, rows_map=None):
    # P: (B, n, 2); raise per-sample info via return of offending row
    diff = P[:, :, None, :] - P[:, None, :, :]
    d2 = np.einsum("bijk,bijk->bij", diff, diff)
    n = P.shape[1]
    ii = np.arange(n)
    d2[:, ii, ii] = np.inf
    bad = np.where(d2.min(axis=(1, 2)) < COLLISION_TOL**2)[0]
    return bad


def _delta_swaps(order_a, order_b):
    """[] if equal; list of adjacent sorted-positions j (pair j, j+1 swapped)
    if the change decomposes into disjoint adjacent transpositions; None if
    the change is more complex."""
    if np.array_equal(order_a, order_b):
        return []
    swaps = []
    i = 0
    n = len(order_a)
    while i < n:
        if order_a[i] == order_b[i]:
            i += 1
        elif (
            i + 1 < n
            and order_a[i] == order_b[i + 1]
            and order_a[i + 1] == order_b[i]
        ):
            swaps.append(i)
            i += 2
        else:
            return None
    return swaps


class _RowTracer:
    """Per-sample state while stepping one stage's grid.

    `degen` counts near-degenerate incidents that refinement resolved:
    grid steps whose order change was not a set of disjoint adjacent swaps
    (simultaneous crossings split recursively), and crossings whose
    transverse gap was below NEAR_TOL while still above the hard collision
    tolerance."""

    def __init__(self, ev, row, e_u, e_v):
        self.ev = ev
        self.row = row
        self.e_u = e_u
        self.e_v = e_v
        self.degen = 0

    def uv(self, s):
        P = self.ev(s, rows=[self.row])[0]
        return P @ self.e_u, P @ self.e_v

    def events(self, s_a, s_b, order_a, order_b, depth=0):
        """Crossing events in (s_a, s_b] as (s*, position j, sign)."""
        swaps = _delta_swaps(order_a, order_b)
        if swaps == []:
            return []
        if swaps is None:
            if depth > _MAX_SPLIT_DEPTH:
                raise DegeneracyError(
                    "could not separate simultaneous crossings"
                )
            if depth == 0:
                self.degen += 1
            s_m = 0.5 * (s_a + s_b)
            u_m, _ = self.uv(s_m)
            order_m = np.argsort(u_m, kind="stable")
            left = self.events(s_a, s_m, order_a, order_m, depth + 1)
            right = self.events(s_m, s_b, order_m, order_b, depth + 1)
            return left + right
        out = []
        for j in swaps:
            pa, pb = int(order_a[j]), int(order_a[j + 1])
            lo, hi = s_a, s_b
            u_lo, _ = self.uv(lo)
            g_lo = u_lo[pa] - u_lo[pb]
            if g_lo == 0.0:
                raise DegeneracyError("coincident projections at step start")
            while hi - lo > _BISECT_TOL:
                mid = 0.5 * (lo + hi)
                u_m, _ = self.uv(mid)
                g_m = u_m[pa] - u_m[pb]
                if (g_m > 0.0) == (g_lo > 0.0):
                    lo = mid
                else:
                    hi = mid
            s_star = 0.5 * (lo + hi)
            u_s, v_s = self.uv(s_star)
            gap = abs(v_s[pa] - v_s[pb])
            if gap < COLLISION_TOL:
                raise CollisionError("strands touch at a crossing")
            if gap < NEAR_TOL:
                self.degen += 1
            sign = 1 if v_s[pa] < v_s[pb] else -1
            out.append((s_star, j, sign))
        out.sort(key=lambda e: (e[0], e[1]))
        return out


def _run_stages(stages, starts, n_steps, e_u, e_v, record_path=False):
    """Trace a batch through the given stages at fixed resolution.

    Returns (per-sample letter list or exception, end positions,
    per-sample degenerate-event counts, path, times)."""
    starts = np.asarray(starts, dtype=float)
    B, n, _ = starts.shape
    letters = [[] for _ in range(B)]
    failed = [None] * B
    degen = [0] * B
    path = [starts.copy()] if record_path else None
    times = [0.0] if record_path else None
    cur = starts
    m = len(stages)
    for si, stage in enumerate(stages):
        ev = stage.bind(cur)
        P_prev = ev(0.0)
        bad = _check_collisions(P_prev)
        for r in bad:
            failed[r] = failed[r] or CollisionError("marked points collide")
        u_prev = P_prev @ e_u
        order_prev = np.argsort(u_prev, axis=1, kind="stable")
        for k in range(1, n_steps + 1):
            s = k / n_steps
            P = ev(s)
            bad = _check_collisions(P)
            for r in bad:
                failed[r] = failed[r] or CollisionError("marked points collide")
            u = P @ e_u
            order = np.argsort(u, axis=1, kind="stable")
            changed = np.where((order != order_prev).any(axis=1))[0]
            for r in changed:
                if failed[r] is not None:
                    continue
                tracer = _RowTracer(ev, int(r), e_u, e_v)
                try:
                    evs = tracer.events(
                        (k - 1) / n_steps, s, order_prev[r], order[r]
                    )
                except (DegeneracyError, CollisionError) as exc:
                    failed[r] = exc
                    continue
                finally:
                    degen[r] += tracer.degen
                for _, j, sign in evs:
                    letters[r].append(sign * (j + 1))
            order_prev = order
            if record_path:
                path.append(P.copy())
                times.append((si + s) / m)
        cur = ev(1.0)
    out = [
        failed[r] if failed[r] is not None else tuple(letters[r])
        for r in range(B)
    ]
    if record_path:
        return out, cur, degen, np.stack(path), np.asarray(times)
    return out, cur, degen, None, None


def _axis_vectors(angle):
    e_u = np.array([math.cos(angle), math.sin(angle)])
    e_v = np.array([-math.sin(angle), math.cos(angle)])
    return e_u, e_v


def _degenerate_config(pts, e_u) -> bool:
    u = np.sort(np.asarray(pts, dtype=float) @ e_u)
    return bool((np.diff(u) < DEGEN_TOL).any())


def trace_stages(
    stages,
    starts,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    record_path: bool = False,
):
    """Trace a batch of configurations through `stages`, refining dt until
    two consecutive resolutions agree letter-for-letter per sample.

    Returns a list whose entries are Trace objects or exceptions
    (CollisionError / DegeneracyError / ResolutionError) per sample.
    """
    starts = np.asarray(starts, dtype=float)
    if starts.ndim == 2:
        starts = starts[None]
    B, n, _ = starts.shape
    e_u, e_v = _axis_vectors(axis_angle)
    m = max(1, len(stages))
    steps0 = max(4, math.ceil(1.0 / (dt * m)))

    results: list = [None] * B
    pending = list(range(B))
    prev: dict = {}
    steps = steps0
    refinements = 0
    path0 = times0 = None  # coarse-run paths, indexed by original row
    while pending:
        sub = starts[pending]
        out, _end, degen, p, t = _run_stages(
            stages_subset(stages, pending), sub, steps, e_u, e_v,
            record_path=record_path and refinements == 0,
        )
        if record_path and p is not None:
            path0, times0 = p, t
        still = []
        for idx, r in enumerate(pending):
            val = out[idx]
            if isinstance(val, Exception):
                results[r] = val
                continue
            if r in prev and prev[r] == val:
                results[r] = Trace(
                    n=n,
                    letters_time=val,
                    axis_angle=axis_angle,
                    dt=1.0 / (steps * m),
                    refinements=refinements,
                    start=starts[r].copy(),
                    end=_end[idx].copy(),
                    degenerate_events=degen[idx],
                    path=path0[:, r] if path0 is not None else None,
                    times=times0,
                )
                continue
            prev[r] = val
            still.append(r)
        pending = still
        if pending:
            refinements += 1
            if refinements > max_refine:
                for r in pending:
                    results[r] = ResolutionError(
                        "trace did not stabilise under refinement"
                    )
                break
            steps *= 2
    return results


def stages_subset(stages, rows):
    """Stages bind to whatever batch they get; only per-sample targets need
    slicing.  `rows` are original batch indices."""
    out = []
    for st in stages:
        if isinstance(st, _LerpStage) and st.target.ndim == 3:
            out.append(_LerpStage(st.target[rows]))
        elif isinstance(st, _SegmentStage) and st.target.ndim == 3:
            out.append(_SegmentStage(st.target[rows], st.index, st.speed))
        else:
            out.append(st)
    return out


# ---------------------------------------------------------------------------
# public tracing entry points
# ---------------------------------------------------------------------------


def map_stages(f: DiskMap):
    return [_FlowStage(p) for p in f.primitives]


def _opts(opts) -> TraceOptions:
    return TraceOptions() if opts is None else opts


def trace_map(
    f: DiskMap,
    x,
    opts: TraceOptions | None = None,
    record_path: bool = False,
) -> Trace:
    """Trace one configuration through the isotopy of f (raises on failure)."""
    o = _opts(opts)
    x, _ = _as_points(x)
    stages = map_stages(f)
    if not stages:
        return Trace(
            n=len(x), letters_time=(), axis_angle=o.axis_angle, dt=o.dt_init,
            refinements=0, start=x.copy(), end=x.copy(),
        )
    res = trace_stages(
        stages, x[None], o.dt_init, o.axis_angle, o.max_refine, record_path
    )[0]
    if isinstance(res, Exception):
        raise res
    return res


def _connector_stages(n, target, speed):
    """One segment stage per point, in index order (point 1 moves first)."""
    return [_SegmentStage(target, i, speed) for i in range(n)]


def _connector_trace(a, b, o: TraceOptions):
    """(word, refinements, degenerate_events) for the connector a -> b.

    Oriented canonically: the lexicographically smaller endpoint is traced
    as the source (its points moving one at a time, in index order) and the
    opposite direction is the letter-wise inverse word, so
    conn(a, b) = conn(b, a)^(-1) holds literally."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(a)
    ka = tuple(a.ravel().tolist())
    kb = tuple(b.ravel().tolist())
    if ka == kb:
        return BraidWord(n, ()), 0, 0
    if ka > kb:
        word, refn, dg = _connector_trace(b, a, o)
        return inverse(word), refn, dg
    res = trace_stages(
        _connector_stages(n, b, o.connector_speed), a[None],
        o.dt_init, o.axis_angle, o.max_refine,
    )[0]
    if isinstance(res, Exception):
        raise res
    return res.word, res.refinements, res.degenerate_events


def connector_braid(a, b, opts: TraceOptions | None = None) -> BraidWord:
    """Braid word of the straight-line connector motion a -> b.

    Point 1 traverses its segment first, then point 2, and so on; the word
    of the reverse direction is the exact inverse word (canonical
    orientation on the endpoint pair), so connector_braid(a, b) followed by
    connector_braid(b, a) cancels to the identity letter-for-letter."""
    return _connector_trace(a, b, _opts(opts))[0]


# ---------------------------------------------------------------------------
# braid extraction and the cocycle identity
# ---------------------------------------------------------------------------


def extract_braid(
    f: DiskMap,
    x,
    z=None,
    opts: TraceOptions | None = None,
) -> TraceResult:
    """The braid gamma(f; x) rel the base configuration z, freely reduced.

    Composition order: the word reads conn(f(x), z) * trajectory * conn(z, x)
    with the rightmost factor acting first.  On a degenerate projection the
    whole extraction is retried once with the axis rotated by a fixed
    irrational angle (every segment must share one axis).
    refinements_used is the largest refinement depth any of the three
    blocks needed; degenerate_events sums their near-degeneracy counts."""
    o = _opts(opts)
    x, _ = _as_points(x)
    n = len(x)
    z = base_config(n) if z is None else np.asarray(z, dtype=float)
    if z.shape != x.shape:
        raise ValueError("base configuration shape mismatch")
    y = f.apply(x)

    last_exc: Exception | None = None
    for attempt in range(2):
        angle = o.axis_angle + attempt * AXIS_NUDGE
        oa = replace(o, axis_angle=angle)
        e_u, _ = _axis_vectors(angle)
        if any(_degenerate_config(c, e_u) for c in (x, y, z)):
            last_exc = DegeneracyError("projection degenerate at endpoints")
            continue
        try:
            traj = trace_map(f, x, oa)
            w1, r1, d1 = _connector_trace(y, z, oa)
            w2, r2, d2 = _connector_trace(z, x, oa)
        except DegeneracyError as exc:
            last_exc = exc
            continue
        letters = (
            w1.letters + tuple(reversed(traj.letters_time)) + w2.letters
        )
        return TraceResult(
            word=free_reduce(BraidWord(n, letters)),
            refinements_used=max(traj.refinements, r1, r2),
            degenerate_events=traj.degenerate_events + d1 + d2,
        )
    raise last_exc if last_exc is not None else DegeneracyError("unreachable")


def cocycle_report(
    f: DiskMap,
    g: DiskMap,
    x,
    z=None,
    opts: TraceOptions | None = None,
) -> dict:
    """The words behind gamma(g then f; x) = gamma(f; g(x)) * gamma(g; x)."""
    x, _ = _as_points(x)
    gf = compose(g, f)  # g acts first
    lhs = extract_braid(gf, x, z, opts).word
    w_f = extract_braid(f, g.apply(x), z, opts).word
    w_g = extract_braid(g, x, z, opts).word
    rhs = free_reduce(concat(w_f, w_g))
    return {
        "lhs": lhs,
        "rhs": rhs,
        "gamma_f": w_f,
        "gamma_g": w_g,
        "equal": braids.equal(lhs, rhs),
    }


def cocycle_check(
    f: DiskMap,
    g: DiskMap,
    x,
    z=None,
    opts: TraceOptions | None = None,
) -> bool:
    """True iff the braid of the composite (g first, then f) equals the
    product of the braids of the factors, gamma(f; g(x)) * gamma(g; x),
    as braid-group elements."""
    return cocycle_report(f, g, x, z, opts)["equal"]


# ---------------------------------------------------------------------------
# batched extraction (the Monte Carlo path)
# ---------------------------------------------------------------------------


def _batch_connector_words(a_batch, b_batch, o: TraceOptions):
    """Connector words a_r -> b_r for a batch, honouring the canonical
    orientation per sample: rows whose source key exceeds the target key are
    traced in the opposite direction and inverted.  Entries may be
    exceptions."""
    a_batch = np.asarray(a_batch, dtype=float)
    b_batch = np.asarray(b_batch, dtype=float)
    B, n, _ = a_batch.shape
    keys_a = [tuple(a_batch[r].ravel().tolist()) for r in range(B)]
    keys_b = [tuple(b_batch[r].ravel().tolist()) for r in range(B)]
    fwd = [r for r in range(B) if keys_a[r] < keys_b[r]]
    bwd = [r for r in range(B) if keys_a[r] > keys_b[r]]
    out: list = [BraidWord(n, ())] * B
    if fwd:
        res = trace_stages(
            _connector_stages(n, b_batch[fwd], o.connector_speed),
            a_batch[fwd], o.dt_init, o.axis_angle, o.max_refine,
        )
        for idx, r in enumerate(fwd):
            out[r] = res[idx] if isinstance(res[idx], Exception) else res[idx].word
    if bwd:
        res = trace_stages(
            _connector_stages(n, a_batch[bwd], o.connector_speed),
            b_batch[bwd], o.dt_init, o.axis_angle, o.max_refine,
        )
        for idx, r in enumerate(bwd):
            out[r] = (
                res[idx]
                if isinstance(res[idx], Exception)
                else inverse(res[idx].word)
            )
    return out


def extract_braids_batch(
    f: DiskMap,
    xs,
    z=None,
    opts: TraceOptions | None = None,
):
    """gamma(f; x) for a batch of configurations; entries are BraidWord or
    the exception that sample raised.  Trajectory and connector traces run
    vectorised over the batch; samples with a degenerate projection are
    retried individually with a rotated axis (see extract_braid)."""
    o = _opts(opts)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 2:
        xs = xs[None]
    B, n, _ = xs.shape
    z = base_config(n) if z is None else np.asarray(z, dtype=float)
    ys = f.apply(xs.reshape(-1, 2)).reshape(B, n, 2)
    e_u, _ = _axis_vectors(o.axis_angle)

    out: list = [None] * B
    batch_rows = [
        r
        for r in range(B)
        if not (
            _degenerate_config(xs[r], e_u)
            or _degenerate_config(ys[r], e_u)
            or _degenerate_config(z, e_u)
        )
    ]
    retry = [r for r in range(B) if r not in set(batch_rows)]

    if batch_rows:
        rows = np.asarray(batch_rows)
        stages = map_stages(f)
        if stages:
            traj = trace_stages(
                stages, xs[rows], o.dt_init, o.axis_angle, o.max_refine
            )
        else:
            traj = [
                Trace(n, (), o.axis_angle, o.dt_init, 0,
                      xs[r].copy(), xs[r].copy())
                for r in batch_rows
            ]
        zb = np.broadcast_to(z, (len(rows), n, 2))
        c1 = _batch_connector_words(ys[rows], zb, o)
        c2 = _batch_connector_words(zb, xs[rows], o)
        for idx, r in enumerate(batch_rows):
            parts = (traj[idx], c1[idx], c2[idx])
            exc = next((p for p in parts if isinstance(p, Exception)), None)
            if exc is not None:
                if isinstance(exc, DegeneracyError):
                    retry.append(r)
                else:
                    out[r] = exc
                continue
            letters = (
                c1[idx].letters
                + tuple(reversed(traj[idx].letters_time))
                + c2[idx].letters
            )
            out[r] = free_reduce(BraidWord(n, letters))

    for r in sorted(retry):
        try:
            out[r] = extract_braid(f, xs[r], z, o).word
        except (DegeneracyError, CollisionError, ResolutionError) as exc:
            out[r] = exc
    return out


# ---------------------------------------------------------------------------
# the image of x -> gamma(f; x) as a multiset
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistogramReport:
    """Braid classes hit by gamma(f; x) over uniform samples, with counts."""

    n: int
    samples: int
    resampled: int
    classes: tuple  # ((representative BraidWord, count), ...), largest first

    def support_size(self) -> int:
        return len(self.classes)


_R2_KEEP = 0.996  # radial cap for uniform draws, matching the MC sampler


def _uniform_configs(rng, count, n):
    need = count * n
    out = np.empty((need, 2))
    have = 0
    while have < need:
        cand = rng.uniform(-1.0, 1.0, size=(2 * (need - have) + 8, 2))
        good = cand[(cand**2).sum(axis=1) <= _R2_KEEP]
        take = min(len(good), need - have)
        out[have : have + take] = good[:take]
        have += take
    return out.reshape(count, n, 2)


def braid_support_histogram(
    f: DiskMap,
    n: int,
    samples: int,
    seed: int,
    z=None,
    opts: TraceOptions | None = None,
) -> HistogramReport:
    """Multiset of braid classes of gamma(f; x) over uniform x-samples.

    Two samples share a class exactly when their words are equal as
    braid-group elements (total invariant: permutation, writhe and the
    lamination action).  Samples whose trace degenerates are rejected and
    redrawn, and the number of redraws is reported."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if n < 2:
        raise ValueError("need at least 2 strands")
    o = _opts(opts)
    rng = np.random.default_rng(
        np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    )
    zc = base_config(n) if z is None else np.asarray(z, dtype=float)
    counts: dict = {}
    reps: dict = {}
    resampled = 0
    need = samples
    while need:
        xs = _uniform_configs(rng, need, n)
        words = extract_braids_batch(f, xs, zc, o)
        need = 0
        for wrd in words:
            if isinstance(wrd, Exception):
                resampled += 1
                need += 1
                continue
            key = braids.braid_key(wrd)
            counts[key] = counts.get(key, 0) + 1
            reps.setdefault(key, wrd)
        if resampled > 1000 + 10 * samples:
            raise BudgetError(
                "braid histogram exceeded its resampling budget",
                partial={"resampled": resampled, "classes": len(counts)},
            )
    order = sorted(counts, key=lambda k: (-counts[k], k))
    classes = tuple((reps[k], counts[k]) for k in order)
    return HistogramReport(
        n=n, samples=samples, resampled=resampled, classes=classes
    )


def crossing_counts(word: BraidWord):
    """Per-generator signed crossing counts {i: (positive, negative)}."""
    counts: dict = {}
    for ell in word.letters:
        i = abs(ell)
        pos, neg = counts.get(i, (0, 0))
        if ell > 0:
            counts[i] = (pos + 1, neg)
        else:
            counts[i] = (pos, neg + 1)
    return counts
