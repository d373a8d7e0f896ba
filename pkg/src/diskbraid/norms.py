"""Entropy-norm lower bounds and Z^m quasi-isometric embedding certificates.

Two ingredients combine here.  A homogeneous quasimorphism Psi on the
group of area-preserving disk maps that vanishes on every autonomous
map also vanishes on every factor of an entropy-zero factorization, so
``|Psi(f)| / D(Psi)`` bounds the entropy norm ||f||_Ent from below.
And disjointly supported conjugates of positive-entropy seeds commute,
so a family whose response matrix under m such functionals is
invertible generates a quasi-isometrically embedded Z^m in the
entropy-norm metric.

Everything numerical is indicative rather than certified: the defect
estimates are sampled *lower* bounds on the true defects, so each
reported bound is a lower bound modulo defect estimation.  Reports say
so explicitly and carry a conservative variant with an inflated defect.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import weakref
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .dynamics import (
    DiskMap,
    TWO_PI,
    compose,
    conjugate_by_rotation,
    power,
    primitive_catalog,
    support_ball,
)
from .ggop import MCConfig, braid_psi, gg_stab_multi, vanishing_check
from .quasimorphism import (
    QmSpec,
    defect_estimate,
    matrix_pair_sampler,
    qm_value,
)

log = logging.getLogger(__name__)

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def map_id(f: DiskMap) -> str:
    """Short stable identifier: stage count plus a digest of the records."""
    blob = json.dumps(
        f.to_records(), sort_keys=True, separators=(",", ":"), default=float
    )
    digest = hashlib.sha1(blob.encode()).hexdigest()[:10]
    return f"{f.n_stages}p-{digest}"


# ---------------------------------------------------------------------------
# quasimorphism rows: (evaluator, defect lower bound, id)
# ---------------------------------------------------------------------------


def qm_row(
    qm: QmSpec,
    *,
    qm_id: str | None = None,
    R: int = 2,
    P_max: int = 8,
    d_budget: int = 120,
    defect_trials: int = 400,
    defect_seed: int = 7,
    pair_len: int = 8,
    pair_power: int = 1,
):
    """Package a counting quasimorphism for the norm-bound machinery.

    Returns ``(psi, defect, qm_id)``: the homogenized braid evaluator,
    a sampled lower bound on the defect of the underlying matrix
    quasimorphism, and a stable id.  The defect sampling maximizes
    |q(a) - q(ab) + q(b)| over random PSL(2, Z) pairs, so it can only
    underestimate; reports built from these rows are indicative."""
    psi = braid_psi(qm, R=R, P_max=P_max, d_budget=d_budget)
    defect = defect_estimate(
        lambda m: qm_value(qm, m, R),
        matrix_pair_sampler(pair_len, pair_power),
        defect_trials,
        defect_seed,
    )
    if not defect > 0:
        raise ValueError(
            "sampled defect is zero; a defect lower bound must be positive "
            "(increase defect_trials, pair_len, or pair_power)"
        )
    if qm_id is None:
        turns = tuple(spec.turns for _, spec in qm.terms)
        digest = hashlib.sha1(repr(turns).encode()).hexdigest()[:8]
        qm_id = f"qm{len(qm.terms)}-{digest}"
    return psi, defect, qm_id


def _normalize_qms(qms):
    entries = []
    for item in qms:
        if not isinstance(item, (tuple, list)) or len(item) not in (2, 3):
            raise ValueError(
                "each quasimorphism entry must be (psi, defect) or "
                "(psi, defect, qm_id)"
            )
        if len(item) == 2:
            psi, defect = item
            qid = f"psi{len(entries)}"
        else:
            psi, defect, qid = item
        defect = float(defect)
        if not defect > 0:
            raise ValueError("defect lower bound must be positive")
        entries.append((psi, defect, str(qid)))
    if not entries:
        raise ValueError("need at least one quasimorphism")
    return entries


# ---------------------------------------------------------------------------
# vanishing checklist
# ---------------------------------------------------------------------------

_VANISH_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _vanishing_failures(psi, light: MCConfig, threads: int):
    """Catalog kinds on which psi fails the vanishing check (cached).

    The checklist always runs with default trace options: it certifies a
    property of the quasimorphism on standard generators, independent of
    how the main measurement is configured."""
    key = (light.n, light.samples, light.seed, light.min_sep, light.p_list)
    try:
        per_psi = _VANISH_CACHE.setdefault(psi, {})
    except TypeError:  # unhashable/unweakrefable evaluator: just recompute
        per_psi = {}
    if key not in per_psi:
        bad = []
        for kind, g in primitive_catalog():
            if not vanishing_check(psi, g, light, threads=threads):
                bad.append(kind)
        per_psi[key] = tuple(bad)
    return per_psi[key]


# ---------------------------------------------------------------------------
# entropy-norm lower bound report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormBoundRow:
    qm_id: str
    value: float  # stabilized Psi(f) estimate (volume-scaled)
    ci: float
    defect: float  # lower bound on the defect of Psi, same scale
    bound: float  # |value| / defect
    label: str
    included: bool = True

    def to_json(self) -> dict:
        return {
            "qm_id": self.qm_id,
            "value": self.value,
            "ci": self.ci,
            "defect": self.defect,
            "bound": self.bound,
            "label": self.label,
            "included": self.included,
        }


@dataclass(frozen=True)
class NormBoundReport:
    map_id: str
    rows: tuple
    best: float
    assumptions: tuple

    def to_json(self) -> dict:
        return {
            "map_id": self.map_id,
            "rows": [r.to_json() for r in self.rows],
            "best": self.best,
            "assumptions": list(self.assumptions),
        }


def entropy_norm_lower(
    f: DiskMap,
    qms,
    mc: MCConfig,
    *,
    defect_multiplier: float = 2.0,
    check_vanishing: bool = True,
    z=None,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    threads: int = 1,
) -> NormBoundReport:
    """Monte-Carlo lower bound on the topological-entropy norm of f.

    Each quasimorphism entry (see `qm_row`) contributes the row
    ``bound = |Psi(f)| / defect``; the report's best bound is the max
    over included rows.  A quasimorphism failing the vanishing check on
    any autonomous catalog primitive is excluded (its row records the
    reason), since the bound argument needs Psi to die on every factor
    of an entropy-zero factorization.  The best row is repeated in a
    conservative variant with the defect multiplied by
    ``defect_multiplier``, as a reminder that sampled defects are lower
    bounds.  Rows whose value is statistically zero (|value| <= 3 ci)
    say so in their label; their nominal bound is noise-scale."""
    entries = _normalize_qms(qms)
    if not defect_multiplier >= 1.0:
        raise ValueError("defect_multiplier must be >= 1")
    kwargs = dict(
        z=z, dt=dt, axis_angle=axis_angle, max_refine=max_refine,
        threads=threads,
    )
    rows = []
    kept = []
    checked = False
    if check_vanishing:
        checked = True
        light = MCConfig(
            n=mc.n,
            samples=min(mc.samples, 192),
            seed=(mc.seed ^ 0x56414E15) & _SEED_MASK,
            min_sep=mc.min_sep,
            p_list=(1, 2),
        )
        for psi, defect, qid in entries:
            bad = _vanishing_failures(psi, light, threads)
            if bad:
                reason = "excluded: nonzero on " + ", ".join(bad)
                log.warning("%s %s", qid, reason)
                rows.append(
                    NormBoundRow(qid, 0.0, 0.0, defect, 0.0, reason, False)
                )
            else:
                kept.append((psi, defect, qid))
    else:
        kept = entries

    vol = math.pi ** mc.n
    if kept:
        ests = gg_stab_multi([e[0] for e in kept], f, mc, **kwargs)
        indicative = []
        for (psi, defect, qid), est in zip(kept, ests):
            dv = vol * defect
            value, ci = est.stabilized, est.ci
            label = "indicative"
            if abs(value) <= 3.0 * ci:
                label += "; consistent with zero at 3*ci"
            row = NormBoundRow(qid, value, ci, dv, abs(value) / dv, label)
            rows.append(row)
            indicative.append(row)
        top = max(indicative, key=lambda r: r.bound)
        rows.append(
            NormBoundRow(
                top.qm_id + "/conservative",
                top.value,
                top.ci,
                top.defect * defect_multiplier,
                top.bound / defect_multiplier,
                f"conservative (defect x {defect_multiplier:g})",
            )
        )
    best = max((r.bound for r in rows if r.included), default=0.0)
    assumptions = (
        "vanishing on autonomous generators "
        + ("checked against the primitive catalog" if checked else "assumed"),
        "defect estimates are sampled lower bounds: bounds are indicative, "
        "see the conservative row",
        "operator defect bounded by volume_factor * matrix-level defect",
    )
    return NormBoundReport(map_id(f), tuple(rows), best, assumptions)


# ---------------------------------------------------------------------------
# disjointly supported families
# ---------------------------------------------------------------------------


def build_disjoint_family(f0: DiskMap, m: int):
    """m rotation conjugates of f0 with pairwise disjoint support balls.

    The copies are conjugates by rotation through 2 pi j / m about the
    origin, so they share every conjugation-invariant quantity (entropy,
    quasimorphism values) and commute whenever their supports are
    disjoint.  Preconditions: the support ball must have radius < 1/m,
    and must sit far enough off-center that the rotated balls clear each
    other (chord 2 c sin(pi/m) > 2 r)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return [f0]
    ball = support_ball(f0)
    if ball is None:
        return [f0] * m  # identity: empty supports are trivially disjoint
    (cx, cy), rad = ball
    if not rad < 1.0 / m:
        raise ValueError(
            f"support radius {rad:.4f} is not < 1/m = {1.0 / m:.4f}: "
            "the disk cannot hold m disjoint copies this large"
        )
    c = math.hypot(cx, cy)
    if 2.0 * c * math.sin(math.pi / m) <= 2.0 * rad:
        raise ValueError(
            "rotated supports would overlap: need "
            "|support center| * sin(pi/m) > support radius; "
            "seed the map farther from the origin"
        )
    fam = [conjugate_by_rotation(f0, TWO_PI * j / m) for j in range(m)]
    balls = [support_ball(g) for g in fam]
    for i in range(m):
        (xi, yi), ri = balls[i]
        for j in range(i + 1, m):
            (xj, yj), rj = balls[j]
            if math.hypot(xi - xj, yi - yj) <= ri + rj:
                raise ValueError(
                    f"disjointness verification failed for copies {i}, {j}"
                )
    return fam


# ---------------------------------------------------------------------------
# Z^m embedding certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialBound:
    k: tuple
    lower: float
    upper: float
    measured: tuple | None = None
    measured_ci: tuple | None = None
    additive_ok: bool | None = None

    def to_json(self) -> dict:
        return {
            "k": list(self.k),
            "lower": self.lower,
            "upper": self.upper,
            "measured": None if self.measured is None else list(self.measured),
            "measured_ci": (
                None if self.measured_ci is None else list(self.measured_ci)
            ),
            "additive_ok": self.additive_ok,
        }


@dataclass(frozen=True)
class EmbeddingCertificate:
    m: int
    map_ids: tuple
    maps: tuple  # primitive records per generator
    calibration: tuple  # raw response matrix Psi_i(f_j) with ci
    calibration_ci: tuple
    matrix: tuple  # calibrated validation responses (should be delta_ij)
    matrix_ci: tuple
    defect_bound: float  # max combined defect (volume-scaled, floored)
    generator_norm: float  # max construction count over the family
    trials: tuple
    valid: bool
    failures: tuple
    note: str

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "map_ids": list(self.map_ids),
            "maps": [list(records) for records in self.maps],
            "calibration": [list(r) for r in self.calibration],
            "calibration_ci": [list(r) for r in self.calibration_ci],
            "matrix": [list(r) for r in self.matrix],
            "matrix_ci": [list(r) for r in self.matrix_ci],
            "defect_bound": self.defect_bound,
            "generator_norm": self.generator_norm,
            "trials": [t.to_json() for t in self.trials],
            "valid": self.valid,
            "failures": [list(x) for x in self.failures],
            "note": self.note,
        }


def _product_map(family, kvec) -> DiskMap:
    return reduce(compose, (power(g, k) for g, k in zip(family, kvec)))


def zm_embedding_report(
    family,
    qms,
    k_vectors,
    mc: MCConfig,
    *,
    z=None,
    dt: float = 1.0 / 256,
    axis_angle: float = 0.0,
    max_refine: int = 6,
    threads: int = 1,
    measure_products: bool = True,
    cond_limit: float = 1e6,
) -> EmbeddingCertificate:
    """Certificate that a disjoint family spans Z^m in the entropy norm.

    Calibration/validation split: the raw response matrix
    M_ij = Psi_i(f_j) is measured at mc.seed, inverted (C = M^-1), and
    the calibrated responses are re-measured on an independent stream at
    mc.seed + 1.  The certificate is VALID when every calibrated
    validation entry matches delta_ij within 3 ci; otherwise the
    offending entries are listed.  The combined functionals
    sum_l C_il G(psi_l) inherit the defect bound
    sum_l |C_il| * volume * defect_l; its maximum over i — floored at
    1/(m * generator_norm), below which the two bounds would cross —
    gives the k-vector lower bounds sum|k_i| / (m * defect_bound),
    while construction counts give the uppers generator_norm * sum|k_i|.
    Basis k-vectors reuse the validation column; other k-vectors are
    measured on the actual product map when ``measure_products``."""
    family = list(family)
    m = len(family)
    if m < 1:
        raise ValueError("family must be nonempty")
    entries = _normalize_qms(qms)
    if len(entries) != m:
        raise ValueError(
            f"need exactly one quasimorphism per generator ({m}), "
            f"got {len(entries)}"
        )
    balls = [support_ball(g) for g in family]
    if any(b is None for b in balls):
        raise ValueError("the identity cannot be an embedding generator")
    for i in range(m):
        (xi, yi), ri = balls[i]
        for j in range(i + 1, m):
            (xj, yj), rj = balls[j]
            if math.hypot(xi - xj, yi - yj) <= ri + rj:
                raise ValueError(
                    f"generators {i} and {j} have overlapping supports"
                )

    kwargs = dict(
        z=z, dt=dt, axis_angle=axis_angle, max_refine=max_refine,
        threads=threads,
    )
    psis = [e[0] for e in entries]
    defects = np.asarray([e[1] for e in entries], dtype=float)
    vol = math.pi ** mc.n
    mc_val = replace(mc, seed=(mc.seed + 1) & _SEED_MASK)

    M = np.empty((m, m))
    S = np.empty((m, m))
    Mv = np.empty((m, m))
    Sv = np.empty((m, m))
    for j, g in enumerate(family):
        for mat, se, conf in ((M, S, mc), (Mv, Sv, mc_val)):
            ests = gg_stab_multi(psis, g, conf, **kwargs)
            mat[:, j] = [e.stabilized for e in ests]
            se[:, j] = [e.ci for e in ests]

    failures = []
    notes = []
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > cond_limit:
        calibrated = False
        C = np.eye(m)
        V, Vci = Mv.copy(), Sv.copy()
        notes.append(
            f"calibration matrix is ill-conditioned (cond={cond:.3g}); "
            "raw validation responses reported"
        )
        failures.append(("condition", cond, cond_limit))
    else:
        calibrated = True
        C = np.linalg.inv(M)
        V = C @ Mv
        Vci = np.sqrt((C * C) @ (Sv * Sv))
        target = np.eye(m)
        for i in range(m):
            for j in range(m):
                tol = 3.0 * Vci[i, j]
                if abs(V[i, j] - target[i, j]) > tol:
                    failures.append((i, j, float(V[i, j]), tol))
    valid = not failures

    gen_norm = float(max(g.n_stages for g in family))
    combined = np.abs(C) @ (vol * defects)
    floor = 1.0 / (m * gen_norm)
    defect_bound = float(max(combined.max(), floor))
    if combined.max() < floor:
        notes.append(
            "defect bound floored at 1/(m * generator_norm) so that "
            "lower <= upper holds by construction"
        )

    trials = []
    for kvec in k_vectors:
        kvec = tuple(int(x) for x in kvec)
        if len(kvec) != m:
            raise ValueError(f"k-vector {kvec} does not have length {m}")
        total = sum(abs(x) for x in kvec)
        lower = total / (m * defect_bound) if total else 0.0
        upper = gen_norm * total
        measured = measured_ci = None
        nonzero = [(j, x) for j, x in enumerate(kvec) if x]
        if total == 0:
            pass
        elif len(nonzero) == 1 and abs(nonzero[0][1]) == 1:
            j, sign = nonzero[0]
            measured = tuple(float(sign * V[i, j]) for i in range(m))
            measured_ci = tuple(float(Vci[i, j]) for i in range(m))
        elif measure_products:
            g = _product_map(family, kvec)
            ests = gg_stab_multi(psis, g, mc_val, **kwargs)
            raw = np.asarray([e.stabilized for e in ests])
            rse = np.asarray([e.ci for e in ests])
            vec = C @ raw
            vci = np.sqrt((C * C) @ (rse * rse))
            measured = tuple(float(x) for x in vec)
            measured_ci = tuple(float(x) for x in vci)
        additive_ok = None
        if measured is not None:
            additive_ok = all(
                abs(measured[i] - kvec[i]) <= 3.0 * measured_ci[i]
                for i in range(m)
            )
        trials.append(
            TrialBound(kvec, lower, upper, measured, measured_ci, additive_ok)
        )

    notes.append("lower bound modulo defect estimation")
    if calibrated:
        notes.insert(0, f"calibrated (cond={cond:.3g}), validated at seed+1")
    return EmbeddingCertificate(
        m=m,
        map_ids=tuple(map_id(g) for g in family),
        maps=tuple(tuple(g.to_records()) for g in family),
        calibration=tuple(tuple(float(x) for x in row) for row in M),
        calibration_ci=tuple(tuple(float(x) for x in row) for row in S),
        matrix=tuple(tuple(float(x) for x in row) for row in V),
        matrix_ci=tuple(tuple(float(x) for x in row) for row in Vci),
        defect_bound=defect_bound,
        generator_norm=gen_norm,
        trials=tuple(trials),
        valid=valid,
        failures=tuple(failures),
        note="; ".join(notes),
    )
