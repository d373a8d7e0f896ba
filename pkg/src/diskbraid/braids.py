"""Artin braid words, elementary invariants, and a faithful equality test.

A braid word is a strand count ``n`` plus a sequence of nonzero signed
integers: letter ``+i`` is the Artin generator sigma_i, ``-i`` its inverse.
Words multiply by concatenation in mapping-class (function composition)
order: in ``concat(w1, w2)`` the right factor ``w2`` acts first, so the
homomorphisms below (permutation, 2x2 image, lamination action) all read a
word left-to-right as a product of operators.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import dynnikov

# ---------------------------------------------------------------------------
# 2x2 integer matrices (det 1), used by the B_3 representation and by the
# Farey module.  Kept as plain nested tuples: hashable, exact, picklable.
# ---------------------------------------------------------------------------

MAT_ID = ((1, 0), (0, 1))


def mat_mul(m1, m2):
    (a, b), (c, d) = m1
    (e, f), (g, h) = m2
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_det(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_inv(m):
    """Inverse of a determinant-1 integer matrix (adjugate)."""
    if mat_det(m) != 1:
        raise ValueError("matrix must have determinant 1")
    (a, b), (c, d) = m
    return ((d, -b), (-c, a))


def mat_pow(m, k: int):
    if k < 0:
        return mat_pow(mat_inv(m), -k)
    out = MAT_ID
    base = m
    while k:
        if k & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        k >>= 1
    return out


def mat_canon(m):
    """Normalize the sign ambiguity in PSL(2,Z): first nonzero entry > 0."""
    for row in m:
        for x in row:
            if x > 0:
                return m
            if x < 0:
                return ((-m[0][0], -m[0][1]), (-m[1][0], -m[1][1]))
    return m


def mat_trace(m):
    return m[0][0] + m[1][1]


# ---------------------------------------------------------------------------
# braid words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BraidWord:
    n: int
    letters: tuple

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("braid group needs n >= 2 strands")
        object.__setattr__(self, "letters", tuple(int(g) for g in self.letters))
        for g in self.letters:
            if g == 0 or abs(g) > self.n - 1:
                raise ValueError(f"letter {g} out of range for n={self.n}")

    def __len__(self):
        return len(self.letters)

    def to_list(self):
        return list(self.letters)


def word(n: int, letters) -> BraidWord:
    return BraidWord(n, tuple(letters))


def identity(n: int) -> BraidWord:
    return BraidWord(n, ())


def free_reduce(w: BraidWord) -> BraidWord:
    """Cancel adjacent sigma_i sigma_i^{-1} pairs only (no braid relations)."""
    out = []
    for g in w.letters:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return BraidWord(w.n, tuple(out))


def concat(w1: BraidWord, w2: BraidWord) -> BraidWord:
    if w1.n != w2.n:
        raise ValueError(f"strand count mismatch: {w1.n} vs {w2.n}")
    return BraidWord(w1.n, w1.letters + w2.letters)


def inverse(w: BraidWord) -> BraidWord:
    return BraidWord(w.n, tuple(-g for g in reversed(w.letters)))


def power(w: BraidWord, k: int) -> BraidWord:
    if k < 0:
        return power(inverse(w), -k)
    return BraidWord(w.n, w.letters * k)


def permutation(w: BraidWord) -> tuple:
    """Strand permutation: entry s-1 is the end position of the strand that
    starts at position s (1-based positions)."""
    strand_at = list(range(1, w.n + 1))  # strand_at[k] = strand at position k+1
    for g in reversed(w.letters):  # rightmost letter acts first
        i = abs(g) - 1
        strand_at[i], strand_at[i + 1] = strand_at[i + 1], strand_at[i]
    out = [0] * w.n
    for pos0, s in enumerate(strand_at):
        out[s - 1] = pos0 + 1
    return tuple(out)


def writhe(w: BraidWord) -> int:
    return sum(1 if g > 0 else -1 for g in w.letters)


def linking_matrix(w: BraidWord):
    """Pairwise linking numbers of a pure braid.

    lk_{ij} is half the signed count of crossings between strands i and j,
    so one full twist sigma_i^2 contributes +1.  Raises on non-pure input.
    """
    if permutation(w) != tuple(range(1, w.n + 1)):
        raise ValueError("linking_matrix requires a pure braid")
    counts = {}
    strand_at = list(range(1, w.n + 1))
    for g in reversed(w.letters):
        i = abs(g) - 1
        s, t = strand_at[i], strand_at[i + 1]
        key = (s, t) if s < t else (t, s)
        counts[key] = counts.get(key, 0) + (1 if g > 0 else -1)
        strand_at[i], strand_at[i + 1] = strand_at[i + 1], strand_at[i]
    lk = [[0] * w.n for _ in range(w.n)]
    for (s, t), c in counts.items():
        if c % 2:
            raise ValueError("odd crossing count on a pure braid pair")
        lk[s - 1][t - 1] = lk[t - 1][s - 1] = c // 2
    return tuple(tuple(row) for row in lk)


_SL2_GEN = {
    1: ((1, 1), (0, 1)),
    -1: ((1, -1), (0, 1)),
    2: ((1, 0), (-1, 1)),
    -2: ((1, 0), (1, 1)),
}


def sl2_image(w: BraidWord):
    """Image of a 3-braid under sigma_1 -> [[1,1],[0,1]],
    sigma_2 -> [[1,0],[-1,1]], normalized up to global sign."""
    if w.n != 3:
        raise ValueError("sl2_image is defined for n = 3 only")
    m = MAT_ID
    for g in w.letters:
        m = mat_mul(m, _SL2_GEN[g])
    return mat_canon(m)


# ---------------------------------------------------------------------------
# word problem via the lamination action
# ---------------------------------------------------------------------------


def _probe_vectors(n: int):
    if n == 2:
        return []
    dim = 2 * n - 4
    p1 = tuple(range(1, dim + 1))
    p2 = tuple((-1) ** k * (k // 2 + 1) for k in range(dim))
    return [p1, p2]


def braid_key(w: BraidWord):
    """Total invariant separating braid-group elements: strand permutation,
    writhe, and the action on the round curves plus two probe laminations.

    The lamination action has kernel exactly the center, and the center is
    split off by the writhe, so equal keys <=> equal group elements.
    """
    seeds = dynnikov.round_curves(w.n) + _probe_vectors(w.n)
    images = tuple(dynnikov.apply_word(c, w.letters) for c in seeds)
    return (w.n, permutation(w), writhe(w), images)


def equal(w1: BraidWord, w2: BraidWord) -> bool:
    if w1.n != w2.n:
        raise ValueError(f"strand count mismatch: {w1.n} vs {w2.n}")
    return braid_key(w1) == braid_key(w2)
