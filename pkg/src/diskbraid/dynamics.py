"""Area-preserving diffeomorphisms of the unit disk.

Every primitive here is a *radial-angle map*

    p  |->  c + Rot(theta(|p - c|)) (p - c)

about some center c: circles around c rotate rigidly by an angle depending
only on the radius.  Such maps preserve Lebesgue measure exactly (the
Jacobian is a rotation plus a shear tangent to the circles), are the time-1
maps of autonomous Hamiltonian flows (H a function of |p - c| alone), and
compose/invert/interpolate in closed form: the time-s map of a primitive is
the same primitive with its strength scaled by s.

Angle profiles return *exactly* 0.0 outside their supporting annulus or
ball, and the evaluator short-circuits zero-angle points, so points outside
the support are returned bit-identically.  That makes "fixes the boundary"
and "disjointly supported maps commute" exact statements, not approximate
ones.

A `DiskMap` is a finite ordered list of primitives, applied first-to-last;
`compose(f, g)` is "f then g".  The associated isotopy runs the primitives'
flows one after another on equal time slices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ResolutionError

TWO_PI = 2.0 * math.pi

# profile family used by every primitive, recorded in run manifests
PROFILES = {"smoothstep": "quintic", "bump": "sin2"}


def _as_points(pts):
    arr = np.asarray(pts, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {arr.shape}")
    return arr, single


def _smoothstep(t):
    # quintic, C^2; exactly 0 at 0 and exactly 1 at 1 in floating point
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _bump(u):
    # sin^2(pi u) on (0, 1), exactly zero outside
    out = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    s = np.sin(np.pi * u[inside])
    out[inside] = s * s
    return out


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _RadialPrimitive:
    """Shared machinery: subclasses provide _angle(rho) and metadata."""

    def _angle(self, rho):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def center(self):
        return (0.0, 0.0)

    def outer_radius(self) -> float:
        """Radius of a ball around `center` containing the support."""
        raise NotImplementedError

    def scaled(self, s: float) -> "_RadialPrimitive":
        """Time-s map of the generating flow (strength multiplied by s)."""
        raise NotImplementedError

    def inverted(self) -> "_RadialPrimitive":
        return self.scaled(-1.0)

    def apply(self, pts):
        arr, single = _as_points(pts)
        cx, cy = self.center
        dx = arr[:, 0] - cx
        dy = arr[:, 1] - cy
        rho = np.hypot(dx, dy)
        theta = self._angle(rho)
        out = arr.copy()
        mask = theta != 0.0
        if mask.any():
            th = theta[mask]
            c, s = np.cos(th), np.sin(th)
            mx, my = dx[mask], dy[mask]
            out[mask, 0] = cx + c * mx - s * my
            out[mask, 1] = cy + s * mx + c * my
        return out[0] if single else out

    def to_record(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class RigidRotation(_RadialPrimitive):
    """Rotation of the whole disk about the origin.  The one primitive that
    moves the boundary circle (it maps it to itself)."""

    angle: float

    def _angle(self, rho):
        return np.full_like(rho, self.angle)

    def outer_radius(self) -> float:
        return 1.0

    def scaled(self, s: float) -> "RigidRotation":
        return RigidRotation(self.angle * s)

    def to_record(self) -> dict:
        return {"kind": "rigid_rotation", "angle": self.angle}


@dataclass(frozen=True)
class AnnulusTwist(_RadialPrimitive):
    """Twist supported on the annulus r_in <= |p - c| <= r_out: the inner
    disk turns by 2 pi k, the angle decays smoothly to 0 at r_out."""

    k: float
    r_in: float = 0.2
    r_out: float = 0.8
    center_x: float = 0.0
    center_y: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r_in < self.r_out:
            raise ValueError("need 0 <= r_in < r_out")

    @property
    def center(self):
        return (self.center_x, self.center_y)

    def _angle(self, rho):
        t = (rho - self.r_in) / (self.r_out - self.r_in)
        return TWO_PI * self.k * (1.0 - _smoothstep(t))

    def outer_radius(self) -> float:
        return self.r_out

    def scaled(self, s: float) -> "AnnulusTwist":
        return replace(self, k=self.k * s)

    def to_record(self) -> dict:
        return {
            "kind": "annulus_twist",
            "k": self.k,
            "r_in": self.r_in,
            "r_out": self.r_out,
            "center": [self.center_x, self.center_y],
        }


@dataclass(frozen=True)
class HamiltonianPush(_RadialPrimitive):
    """Rotation concentrated in the open annulus (r_in, r_out) with a
    sin^2 angle profile; both the inner disk and the outside stay fixed."""

    t: float
    r_in: float = 0.1
    r_out: float = 0.6
    center_x: float = 0.0
    center_y: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r_in < self.r_out:
            raise ValueError("need 0 <= r_in < r_out")

    @property
    def center(self):
        return (self.center_x, self.center_y)

    def _angle(self, rho):
        u = (rho - self.r_in) / (self.r_out - self.r_in)
        return self.t * _bump(u)

    def outer_radius(self) -> float:
        return self.r_out

    def scaled(self, s: float) -> "HamiltonianPush":
        return replace(self, t=self.t * s)

    def to_record(self) -> dict:
        return {
            "kind": "hamiltonian_push",
            "t": self.t,
            "r_in": self.r_in,
            "r_out": self.r_out,
            "center": [self.center_x, self.center_y],
        }


@dataclass(frozen=True)
class RadialFlow(_RadialPrimitive):
    """Differential rotation about the origin: full angle t at the center,
    decaying to exactly 0 at radius 1 - margin."""

    t: float
    margin: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.margin < 1.0:
            raise ValueError("need 0 < margin < 1")

    def _angle(self, rho):
        return self.t * (1.0 - _smoothstep(rho / (1.0 - self.margin)))

    def outer_radius(self) -> float:
        return 1.0 - self.margin

    def scaled(self, s: float) -> "RadialFlow":
        return replace(self, t=self.t * s)

    def to_record(self) -> dict:
        return {"kind": "radial_flow", "t": self.t, "margin": self.margin}


@dataclass(frozen=True)
class StripShear(_RadialPrimitive):
    """Shear along a circular band.  The band is the annulus of radii
    [R - w, R + w] about an off-disk-center point chosen so the band passes
    through the origin: axis 'h' centers at (cx, cy - R) (band locally
    horizontal near (cx, cy)), axis 'v' at (cx + R, cy).  The angle profile
    tau * bump / rho gives arc speed tau at the band core, independent of
    the band radius."""

    axis: str
    tau: float
    R: float = 0.42
    w: float = 0.10
    anchor_x: float = 0.0
    anchor_y: float = 0.0

    def __post_init__(self):
        if self.axis not in ("h", "v"):
            raise ValueError("axis must be 'h' or 'v'")
        if not 0.0 < self.w < self.R:
            raise ValueError("need 0 < w < R")
        # the moved set is the band annulus about `center`; it must stay in
        # the unit disk or band circles would carry points out of it
        reach = math.hypot(self.anchor_x, self.anchor_y) + 2 * self.R + self.w
        if reach > 1.0 + 1e-12:
            raise ValueError(
                f"band reaches {reach:.3f} > 1: need |anchor| + 2R + w <= 1"
            )

    @property
    def center(self):
        if self.axis == "h":
            return (self.anchor_x, self.anchor_y - self.R)
        return (self.anchor_x + self.R, self.anchor_y)

    def _angle(self, rho):
        u = (rho - (self.R - self.w)) / (2.0 * self.w)
        out = np.zeros_like(rho)
        inside = (u > 0.0) & (u < 1.0)
        s = np.sin(np.pi * u[inside])
        out[inside] = self.tau * s * s / rho[inside]
        return out

    def outer_radius(self) -> float:
        return self.R + self.w

    def scaled(self, s: float) -> "StripShear":
        return replace(self, tau=self.tau * s)

    def to_record(self) -> dict:
        return {
            "kind": "strip_shear",
            "axis": self.axis,
            "tau": self.tau,
            "R": self.R,
            "w": self.w,
            "anchor": [self.anchor_x, self.anchor_y],
        }


PRIMITIVE_KINDS = {
    "rigid_rotation": RigidRotation,
    "annulus_twist": AnnulusTwist,
    "hamiltonian_push": HamiltonianPush,
    "radial_flow": RadialFlow,
    "strip_shear": StripShear,
}


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskMap:
    """Ordered composite of radial-angle primitives, applied first-to-last."""

    primitives: tuple = ()

    def __post_init__(self):
        prims = tuple(self.primitives)
        object.__setattr__(self, "primitives", prims)
        for p in prims:
            if not isinstance(p, _RadialPrimitive):
                raise TypeError(f"not a primitive: {p!r}")

    @property
    def n_stages(self) -> int:
        return len(self.primitives)

    def apply(self, pts):
        out = pts
        for p in self.primitives:
            out = p.apply(out)
        if not self.primitives:
            arr, single = _as_points(pts)
            out = arr[0] if single else arr.copy()
        return out

    def __call__(self, pts):
        return self.apply(pts)

    def inverse(self) -> "DiskMap":
        return DiskMap(tuple(p.inverted() for p in reversed(self.primitives)))

    def to_records(self):
        return [p.to_record() for p in self.primitives]


def identity() -> DiskMap:
    return DiskMap(())


def eval_map(f: DiskMap, p):
    """Image of a single point; raises on points outside the closed disk."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (2,):
        raise ValueError("eval_map takes a single point")
    if math.hypot(arr[0], arr[1]) > 1.0 + 1e-12:
        raise ValueError("point outside the unit disk")
    return f.apply(arr)


def jacobian_det(f: DiskMap, p, h: float = 1e-6) -> float:
    """Jacobian determinant at p via the chain rule over the stages:
    central finite differences per primitive, multiplied along the orbit
    (area audit).  Differencing the composite directly is numerically
    unstable for strong shears — the stencil spread after one stage is
    amplified by that stage's gradient, and the next stage's curvature
    acting on the widened stencil corrupts the estimate."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(p, dtype=float)
    if x.shape != (2,):
        raise ValueError("jacobian_det takes a single point")
    det = 1.0
    for prim in f.primitives:
        if math.hypot(x[0], x[1]) + h >= 1.0:
            raise ValueError("stencil leaves the disk")
        stencil = np.array(
            [
                [x[0] + h, x[1]],
                [x[0] - h, x[1]],
                [x[0], x[1] + h],
                [x[0], x[1] - h],
            ]
        )
        im = prim.apply(stencil)
        dxu = (im[0] - im[1]) / (2.0 * h)
        dyu = (im[2] - im[3]) / (2.0 * h)
        det *= float(dxu[0] * dyu[1] - dxu[1] * dyu[0])
        x = prim.apply(x)
    return det


def compose(f: DiskMap, g: DiskMap) -> DiskMap:
    """The map "f then g" (apply f first, then g)."""
    return DiskMap(f.primitives + g.primitives)


def inverse(f: DiskMap) -> DiskMap:
    return f.inverse()


def power(f: DiskMap, k: int) -> DiskMap:
    if k == 0:
        return identity()
    if k < 0:
        return power(f.inverse(), -k)
    return DiskMap(f.primitives * k)


def eval_isotopy(f: DiskMap, pts, t: float):
    """Position at time t in [0, 1] of the isotopy from identity to f that
    runs each primitive's flow on an equal slice of time."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("isotopy time must lie in [0, 1]")
    m = f.n_stages
    if m == 0:
        arr, single = _as_points(pts)
        return arr[0] if single else arr.copy()
    out = pts
    pos = t * m
    for i, p in enumerate(f.primitives):
        if pos >= i + 1.0:
            out = p.apply(out)
        elif pos > i:
            out = p.scaled(pos - i).apply(out)
            break
        else:
            break
    arr, single = _as_points(out)
    return arr[0] if single else arr


def fixes_boundary(f: DiskMap) -> bool:
    """True when every primitive's support ball stays strictly inside the
    unit disk (rigid rotations fail this: they move boundary points)."""
    for p in f.primitives:
        if isinstance(p, RigidRotation):
            return False
        cx, cy = p.center
        if math.hypot(cx, cy) + p.outer_radius() >= 1.0:
            return False
    return True


def support_ball(f: DiskMap):
    """(center, radius) of a ball containing every primitive's support, or
    None for the identity.  Center is the mean of primitive centers."""
    prims = f.primitives
    if not prims:
        return None
    cx = sum(p.center[0] for p in prims) / len(prims)
    cy = sum(p.center[1] for p in prims) / len(prims)
    rad = max(
        math.hypot(p.center[0] - cx, p.center[1] - cy) + p.outer_radius()
        for p in prims
    )
    return (cx, cy), rad


def moving_mask(f: DiskMap, pts):
    """Boolean mask of points moved by f at *some* time of its isotopy.

    Every primitive is a radial-angle map whose time-s flow scales the
    angle profile by s without changing where it vanishes, so a point is
    moved at some time iff some primitive's profile is nonzero at the
    point's radius — the exact condition the evaluator short-circuits
    on.  Points outside the mask are fixed bit-identically at every
    isotopy time and every power, so a configuration with no active
    point produces the trivial braid (the connectors cancel exactly)
    and contributes exactly zero to any quasimorphism integral; the
    Monte-Carlo layer uses that to skip or condition such samples."""
    arr, single = _as_points(pts)
    out = np.zeros(len(arr), dtype=bool)
    for p in f.primitives:
        cx, cy = p.center
        rho = np.hypot(arr[:, 0] - cx, arr[:, 1] - cy)
        out |= np.asarray(p._angle(rho)) != 0.0
    return bool(out[0]) if single else out


def conjugate_by_rotation(f: DiskMap, phi: float) -> DiskMap:
    """Exact conjugate Rot_phi o f o Rot_phi^(-1): radial-angle primitives
    conjugate by rotating their centers."""
    c, s = math.cos(phi), math.sin(phi)

    def rot(x, y):
        return (c * x - s * y, s * x + c * y)

    out = []
    for p in f.primitives:
        if isinstance(p, (RigidRotation, RadialFlow)):
            out.append(p)  # already rotation-invariant about the origin
        elif isinstance(p, AnnulusTwist):
            x, y = rot(p.center_x, p.center_y)
            out.append(replace(p, center_x=x, center_y=y))
        elif isinstance(p, HamiltonianPush):
            x, y = rot(p.center_x, p.center_y)
            out.append(replace(p, center_x=x, center_y=y))
        elif isinstance(p, StripShear):
            # bake the rotated band center into an anchor-free twist about it
            bx, by = rot(*p.center)
            out.append(
                _RotatedStripShear(p.axis, p.tau, p.R, p.w, band_x=bx,
                                   band_y=by)
            )
        elif isinstance(p, _RotatedStripShear):
            bx, by = rot(p.band_x, p.band_y)
            out.append(replace(p, band_x=bx, band_y=by))
        else:  # pragma: no cover - new primitive kinds must opt in
            raise TypeError(f"cannot conjugate {type(p).__name__}")
    return DiskMap(tuple(out))


@dataclass(frozen=True)
class _RotatedStripShear(StripShear):
    """A StripShear whose band center has been moved off the h/v grid by a
    rotation; identical dynamics, explicit center.  The anchor fields are
    unused — the band is placed by its center directly."""

    band_x: float = 0.0
    band_y: float = 0.0

    def __post_init__(self):
        if self.axis not in ("h", "v"):
            raise ValueError("axis must be 'h' or 'v'")
        if not 0.0 < self.w < self.R:
            raise ValueError("need 0 < w < R")
        reach = math.hypot(self.band_x, self.band_y) + self.R + self.w
        if reach > 1.0 + 1e-12:
            raise ValueError(
                f"rotated band reaches {reach:.3f} > 1: the annulus about "
                "the band center must stay in the unit disk"
            )

    @property
    def center(self):
        return (self.band_x, self.band_y)

    def scaled(self, s: float) -> "_RotatedStripShear":
        return replace(self, tau=self.tau * s)

    def to_record(self) -> dict:
        rec = super().to_record()
        rec["band_center"] = [self.band_x, self.band_y]
        return rec


# ---------------------------------------------------------------------------
# standard builds
# ---------------------------------------------------------------------------


def egg_beater(tau: float, R: float = 0.40, w: float = 0.18) -> DiskMap:
    """Two crossing circular shear bands (vertical pass, then horizontal):
    the standard positive-entropy stirring map of this package.  The wide
    default bands keep the two annuli strongly coupled, so a noticeable
    fraction of short trajectories visits both bands (the hyperbolic
    regime); thin bands make that regime exponentially rare.  The reach
    constraint 2R + w <= 1 (see StripShear) caps how wide the bands can
    get."""
    return DiskMap((StripShear("v", tau, R, w), StripShear("h", tau, R, w)))


def miniature_beater(tau: float, center=(0.0, 0.0), R: float = 0.21,
                     w: float = 0.07) -> DiskMap:
    """Small egg beater supported in the ball of radius 2R + w about
    `center`; used to build disjointly supported families.  The default
    support radius is just under 1/2, the largest that still admits a
    disjoint pair inside the disk."""
    cx, cy = center
    return DiskMap(
        (
            StripShear("v", tau, R, w, anchor_x=cx, anchor_y=cy),
            StripShear("h", tau, R, w, anchor_x=cx, anchor_y=cy),
        )
    )


def sample_primitive(rng) -> _RadialPrimitive:
    """Random primitive with support well inside the disk (for tests and
    self-checks)."""
    kind = int(rng.integers(0, 4))
    if kind == 0:
        cx, cy = rng.uniform(-0.2, 0.2, size=2)
        r_out = float(rng.uniform(0.3, 0.7))
        r_in = float(rng.uniform(0.05, 0.6)) * r_out
        return AnnulusTwist(float(rng.uniform(-1.5, 1.5)), r_in, r_out, cx, cy)
    if kind == 1:
        cx, cy = rng.uniform(-0.2, 0.2, size=2)
        r_out = float(rng.uniform(0.3, 0.7))
        r_in = float(rng.uniform(0.05, 0.6)) * r_out
        return HamiltonianPush(float(rng.uniform(-4.0, 4.0)), r_in, r_out, cx, cy)
    if kind == 2:
        return RadialFlow(float(rng.uniform(-4.0, 4.0)), margin=0.08)
    return StripShear(
        "hv"[int(rng.integers(0, 2))], float(rng.uniform(-1.2, 1.2))
    )


def sample_map(rng, max_primitives: int = 3) -> DiskMap:
    k = int(rng.integers(1, max_primitives + 1))
    return DiskMap(tuple(sample_primitive(rng) for _ in range(k)))


def primitive_catalog():
    """Fixed representatives of every autonomous primitive kind, as
    single-stage maps with a label: ``(kind, DiskMap)`` pairs.

    Autonomous flows have zero topological entropy, so any functional
    meant to bound entropy from below must vanish on each of these; the
    norm-bound machinery uses this catalog as its vanishing checklist."""
    reps = (
        ("radial_flow", RadialFlow(2.0)),
        ("strip_shear_h", StripShear("h", 2.5)),
        ("strip_shear_v", StripShear("v", -1.5)),
        ("hamiltonian_push", HamiltonianPush(3.0)),
        ("annulus_twist", AnnulusTwist(1.25)),
    )
    return tuple((kind, DiskMap((p,))) for kind, p in reps)


# ---------------------------------------------------------------------------
# polygonal curves and their transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyCurve:
    """Closed polygonal curve (the edge from the last vertex back to the
    first is implicit).  `punctures` records which marked points the curve
    is declared to enclose."""

    vertices: np.ndarray
    punctures: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("a closed curve needs at least 3 vertices")
        nxt = np.roll(v, -1, axis=0)
        if (np.hypot(*(nxt - v).T) == 0.0).any():
            raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "punctures", tuple(self.punctures))

    def length(self) -> float:
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        return float(np.hypot(d[:, 0], d[:, 1]).sum())


def circle_curve(radius: float = 0.5, n_vertices: int = 64,
                 center=(0.0, 0.0)) -> PolyCurve:
    ang = 2.0 * np.pi * np.arange(n_vertices) / n_vertices
    return PolyCurve(
        np.column_stack(
            [center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)]
        )
    )


def transport_curve(
    f: DiskMap, c: PolyCurve, tol: float = 0.01, max_vertices: int = 400_000
) -> PolyCurve:
    """Image polygon of a closed curve under f, with adaptive refinement:
    wherever the image of a segment's midpoint deviates from the midpoint of
    the image segment by more than tol, the midpoint is inserted and the
    test repeats.  Raises ResolutionError (with the unrefined image attached
    as `partial`) when refinement would exceed the vertex budget."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    verts = c.vertices
    images = f.apply(verts)
    while True:
        nxt_v = np.roll(verts, -1, axis=0)
        nxt_im = np.roll(images, -1, axis=0)
        mid = 0.5 * (verts + nxt_v)
        mid_im = f.apply(mid)
        dev = np.hypot(*(mid_im - 0.5 * (images + nxt_im)).T)
        bad = np.where(dev > tol)[0]
        if len(bad) == 0:
            break
        if len(verts) + len(bad) > max_vertices:
            raise ResolutionError(
                f"curve refinement exceeds {max_vertices} vertices",
                partial=PolyCurve(images, c.punctures),
            )
        verts = np.insert(verts, bad + 1, mid[bad], axis=0)
        images = np.insert(images, bad + 1, mid_im[bad], axis=0)
    return PolyCurve(images, c.punctures)
