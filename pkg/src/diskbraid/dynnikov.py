"""Piecewise-linear action of braid generators on integral laminations.

Coordinates
-----------
An integral lamination (isotopy class of a multicurve) in the n-punctured
disk is encoded by 2n-4 integers

    (a_1, ..., a_{n-2}, b_1, ..., b_{n-2})

one (a_j, b_j) chart sitting between punctures j and j+1.  The zero vector
is the empty lamination.  The encoding is a bijection from Z^{2n-4} onto
the set of integral laminations, and each generator acts by an invertible
piecewise-linear map, so iterating letters never leaves the coordinate
lattice and inverse letters undo updates exactly.

The "round" curve c_j (a small circle around punctures j and j+1) has all
a-coordinates zero and b-coordinates

    c_1:      b_1 = +1
    c_j:      b_{j-1} = -1, b_j = +1      (1 < j < n-1)
    c_{n-1}:  b_{n-2} = -1.

Update rules
------------
With x+ = max(x, 0) and x- = min(x, 0), the generator sigma_1 acts on the
first chart, sigma_{n-1} on the last chart, and an interior sigma_i on the
two charts (a_{i-1}, b_{i-1}, a_i, b_i).  The negative interior letter is
computed through the reflection trick: conjugating by the left-right flip
of the disk maps sigma_i to sigma_{n-i}^{-1} and in coordinates reads
(a_1, b_1, a_2, b_2) -> (a_2, -b_2, a_1, -b_1) on the affected charts.

These exact rules were validated against an independent free-group
(pi_1 substitution) model of the braid action: orbit transport tables are
bijective between lamination classes and coordinate vectors, growth rates
agree, braid relations and center triviality hold.  Do not modify any
formula here without re-running that cross-validation.

Convention: words act as mapping classes composed right-to-left, i.e. in
``apply_word`` the *rightmost* letter of the word acts first.
"""

from __future__ import annotations

from collections.abc import Sequence

Coords = tuple  # tuple of 2n-4 ints


def _pos(x):
    return x if x > 0 else 0


def _neg(x):
    return x if x < 0 else 0


def _end1(a, b, sign):
    # sigma_1^{+-1} on the first chart
    if sign > 0:
        return (-b + _pos(a + _pos(b)), a + _pos(b))
    return (b - _pos(_pos(b) - a), _pos(b) - a)


def _end2(a, b, sign):
    # sigma_{n-1}^{+-1} on the last chart
    if sign > 0:
        return (-b - _pos(-_neg(b) - a), a + _neg(b))
    return (b - _neg(_neg(b) - a), _neg(b) - a)


def _interior(a1, b1, a2, b2, sign):
    # interior sigma_i^{+-1} on charts i-1 and i
    if sign > 0:
        c = a1 - a2 - _pos(b2) + _neg(b1)
        return (
            a1 - _pos(b1) - _pos(_pos(b2) + c),
            b2 + _neg(c),
            a2 - _neg(b2) - _neg(_neg(b1) - c),
            b1 - _neg(c),
        )
    ra1, rb1, ra2, rb2 = a2, -b2, a1, -b1
    c = ra1 - ra2 - _pos(rb2) + _neg(rb1)
    a1p = ra1 - _pos(rb1) - _pos(_pos(rb2) + c)
    b1p = rb2 + _neg(c)
    a2p = ra2 - _neg(rb2) - _neg(_neg(rb1) - c)
    b2p = rb1 - _neg(c)
    return (a2p, -b2p, a1p, -b1p)


def strands_of(c: Sequence) -> int:
    """Number of punctures n encoded by a coordinate vector."""
    if len(c) % 2:
        raise ValueError("coordinate vector must have even length 2n-4")
    return len(c) // 2 + 2


def zero(n: int) -> Coords:
    """Empty lamination for n punctures."""
    if n < 2:
        raise ValueError("need n >= 2")
    return (0,) * (2 * n - 4)


def round_curve(n: int, j: int) -> Coords:
    """Coordinates of the round curve c_j around punctures j and j+1."""
    if not 1 <= j <= n - 1:
        raise ValueError(f"round curve index {j} out of range for n={n}")
    if n == 2:
        return ()
    a = [0] * (n - 2)
    b = [0] * (n - 2)
    if j == 1:
        b[0] = 1
    elif j == n - 1:
        b[n - 3] = -1
    else:
        b[j - 2] = -1
        b[j - 1] = 1
    return tuple(a) + tuple(b)


def round_curves(n: int) -> list:
    return [round_curve(n, j) for j in range(1, n)]


def dynnikov_update(c: Sequence, letter: int) -> Coords:
    """Apply one signed Artin generator to a coordinate vector.

    ``letter`` is +-i for sigma_i^{+-1}.  Values are plain Python ints, so
    growth past 64 bits promotes to big integers transparently.
    """
    n = strands_of(c)
    i, sign = abs(letter), (1 if letter > 0 else -1)
    if letter == 0 or i > n - 1:
        raise ValueError(f"generator {letter} out of range for n={n}")
    if n == 2:
        # single chartless strand pair: the lamination space is a point
        return tuple(c)
    a = list(c[: n - 2])
    b = list(c[n - 2:])
    if i == 1:
        a[0], b[0] = _end1(a[0], b[0], sign)
    elif i == n - 1:
        a[-1], b[-1] = _end2(a[-1], b[-1], sign)
    else:
        a1, b1, a2, b2 = a[i - 2], b[i - 2], a[i - 1], b[i - 1]
        a[i - 2], b[i - 2], a[i - 1], b[i - 1] = _interior(a1, b1, a2, b2, sign)
    return tuple(a) + tuple(b)


def apply_word(c: Sequence, letters: Sequence[int]) -> Coords:
    """Act by a braid word; the rightmost letter acts first."""
    c = tuple(c)
    for g in reversed(letters):
        c = dynnikov_update(c, g)
    return c


def norm1(c: Sequence) -> int:
    """l1 norm of a coordinate vector (integer, overflow-free)."""
    return sum(abs(x) for x in c)
