"""Finite metric spaces with exact rational distances and the four-point test.

The four-point test: for any four points, pair them up in the three possible
ways and add the two distances in each pairing.  With the three pair-sums
sorted as ``e <= f <= g``, the *defect* of the quadruple is ``g - f``.  A
space is delta-hyperbolic iff every quadruple has defect at most ``2*delta``.
Quadruples with a repeated point always have defect 0 (triangle inequality),
so enumeration runs over 4-subsets only.

All arithmetic is exact.  Hot loops run on an integer matrix obtained by
scaling every distance by the least common multiple of the denominators;
this is a unit change, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError

Label = str

# Above this size the quadruple scan switches to chunked numpy enumeration.
_NUMPY_QUAD_THRESHOLD = 14


@dataclass(frozen=True)
class MetricViolation:
    """One broken metric axiom with the points that witness it."""

    axiom: str  # "shape" | "diagonal" | "symmetry" | "positivity" | "triangle"
    points: tuple[Label, ...]
    detail: str


def validate_metric(points: Sequence[Label], dist) -> list[MetricViolation]:
    """Check the metric axioms on a raw labelled matrix.

    Returns an empty list iff ``dist`` is a metric on ``points``.  A
    dimension mismatch is an input error, not a violation.
    """
    n = len(points)
    if len(set(points)) != n:
        raise InputError("duplicate point labels")
    if len(dist) != n or any(len(row) != n for row in dist):
        raise InputError(f"distance matrix is not {n}x{n}")
    out: list[MetricViolation] = []
    for i in range(n):
        if dist[i][i] != 0:
            out.append(MetricViolation("diagonal", (points[i],),
                                       f"d({points[i]},{points[i]})={dist[i][i]} != 0"))
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                out.append(MetricViolation("symmetry", (points[i], points[j]),
                                           f"{dist[i][j]} != {dist[j][i]}"))
            if dist[i][j] <= 0:
                out.append(MetricViolation("positivity", (points[i], points[j]),
                                           f"d={dist[i][j]} <= 0 for distinct points"))
    for i, j, k in combinations(range(n), 3):
        a, b, c = dist[i][j], dist[j][k], dist[i][k]
        if c > a + b:
            out.append(MetricViolation("triangle", (points[i], points[j], points[k]),
                                       f"d({points[i]},{points[k]})={c} > {a}+{b}"))
        if a > c + b:
            out.append(MetricViolation("triangle", (points[i], points[k], points[j]),
                                       f"d({points[i]},{points[j]})={a} > {c}+{b}"))
        if b > a + c:
            out.append(MetricViolation("triangle", (points[j], points[i], points[k]),
                                       f"d({points[j]},{points[k]})={b} > {a}+{c}"))
    return out


class FiniteMetricSpace:
    """Immutable labelled point set with an exact rational distance matrix.

    Construction validates the metric axioms (raise ``InputError``) unless
    ``validate=False`` is passed by a caller that has already checked them.
    """

    __slots__ = ("points", "dist", "_index", "_scale", "_introws", "_np", "_hash")

    def __init__(self, points: Sequence[Label], dist, validate: bool = True):
        pts = tuple(str(p) for p in points)
        mat = tuple(tuple(Fraction(x) for x in row) for row in dist)
        if validate:
            bad = validate_metric(pts, mat)
            if bad:
                first = bad[0]
                raise InputError(f"not a metric space: {first.axiom} at {first.points}: {first.detail}")
        else:
            if len(mat) != len(pts) or any(len(r) != len(pts) for r in mat):
                raise InputError("distance matrix shape mismatch")
        self.points = pts
        self.dist = mat
        self._index = {p: i for i, p in enumerate(pts)}
        self._scale = None
        self._introws = None
        self._np = None
        self._hash = None

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteMetricSpace)
                and self.points == other.points and self.dist == other.dist)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.points, self.dist))
        return self._hash

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({len(self)} points)"

    def index(self, label: Label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"unknown point label {label!r}") from None

    def has(self, label: Label) -> bool:
        return label in self._index

    def d(self, x: Label, y: Label) -> Fraction:
        return self.dist[self.index(x)][self.index(y)]

    def di(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]

    # -- scaled integer view ------------------------------------------------

    def scale(self) -> int:
        """LCM of all denominators; the integer matrix is dist * scale."""
        if self._scale is None:
            s = 1
            for row in self.dist:
                for v in row:
                    s = s * v.denominator // math.gcd(s, v.denominator)
            self._scale = s
        return self._scale

    def int_rows(self) -> list[list[int]]:
        if self._introws is None:
            s = self.scale()
            self._introws = [[int(v * s) for v in row] for row in self.dist]
        return self._introws

    def int_matrix(self) -> np.ndarray:
        if self._np is None:
            self._np = np.array(self.int_rows(), dtype=np.int64)
        return self._np

    def scaled(self, value: Fraction) -> Optional[int]:
        """``value * scale`` as an int, or None if it is not integral."""
        v = Fraction(value) * self.scale()
        return int(v) if v.denominator == 1 else None

    # -- derived spaces ------------------------------------------------------

    def restrict(self, labels: Iterable[Label]) -> "FiniteMetricSpace":
        """Subspace on the given labels, keeping their order of appearance here."""
        keep = [p for p in self.points if p in set(labels)]
        missing = set(labels) - set(keep)
        if missing:
            raise InputError(f"unknown labels {sorted(missing)}")
        idx = [self._index[p] for p in keep]
        rows = tuple(tuple(self.dist[i][j] for j in idx) for i in idx)
        return FiniteMetricSpace(keep, rows, validate=False)

    def relabel(self, mapping: dict[Label, Label]) -> "FiniteMetricSpace":
        new = [mapping.get(p, p) for p in self.points]
        if len(set(new)) != len(new):
            raise InputError("relabelling collides")
        return FiniteMetricSpace(new, self.dist, validate=False)

    def rescale(self, factor: Fraction) -> "FiniteMetricSpace":
        f = Fraction(factor)
        if f <= 0:
            raise InputError("scale factor must be positive")
        rows = tuple(tuple(v * f for v in row) for row in self.dist)
        return FiniteMetricSpace(self.points, rows, validate=False)


@dataclass(frozen=True)
class QuadrupleWitness:
    """A quadruple with its three pair-sums and defect.

    ``sums`` follows the fixed pairing order ``(12|34, 13|24, 24|13...)``:
    sums[0] = d(p1,p2)+d(p3,p4), sums[1] = d(p1,p3)+d(p2,p4),
    sums[2] = d(p1,p4)+d(p2,p3).  The defect is the gap between the largest
    and the middle sorted sum.
    """

    quad: tuple[Label, Label, Label, Label]
    sums: tuple[Fraction, Fraction, Fraction]
    defect: Fraction

    @classmethod
    def from_space(cls, space: FiniteMetricSpace, quad: Sequence[Label]) -> "QuadrupleWitness":
        if len(quad) != 4:
            raise InputError("a quadruple needs exactly 4 labels")
        i, j, k, l = (space.index(q) for q in quad)
        sums = (space.di(i, j) + space.di(k, l),
                space.di(i, k) + space.di(j, l),
                space.di(i, l) + space.di(j, k))
        e, f, g = sorted(sums)
        return cls(tuple(quad), sums, g - f)


def _max_defect_small(space: FiniteMetricSpace) -> tuple[Fraction, Optional[tuple[int, int, int, int]]]:
    rows = space.int_rows()
    best = 0
    best_quad = None
    n = len(space)
    for i, j, k, l in combinations(range(n), 4):
        s1 = rows[i][j] + rows[k][l]
        s2 = rows[i][k] + rows[j][l]
        s3 = rows[i][l] + rows[j][k]
        mx = max(s1, s2, s3)
        defect = 2 * mx + min(s1, s2, s3) - (s1 + s2 + s3)
        if defect > best:
            best = defect
            best_quad = (i, j, k, l)
    return Fraction(best, space.scale()), best_quad


def _max_defect_numpy(space: FiniteMetricSpace) -> tuple[Fraction, Optional[tuple[int, int, int, int]]]:
    D = space.int_matrix()
    n = len(space)
    best = -1
    best_quad = None
    for i in range(n - 3):
        for j in range(i + 1, n - 2):
            # all k < l drawn from j+1..n-1
            k_idx, l_idx = np.triu_indices(n - j - 1, k=1)
            k_idx = k_idx + j + 1
            l_idx = l_idx + j + 1
            if len(k_idx) == 0:
                continue
            s1 = D[i, j] + D[k_idx, l_idx]
            s2 = D[i, k_idx] + D[j, l_idx]
            s3 = D[i, l_idx] + D[j, k_idx]
            stack = np.stack((s1, s2, s3))
            mx = stack.max(axis=0)
            defect = 2 * mx + stack.min(axis=0) - stack.sum(axis=0)
            pos = int(defect.argmax())
            if defect[pos] > best:
                best = int(defect[pos])
                best_quad = (i, j, int(k_idx[pos]), int(l_idx[pos]))
    if best <= 0:
        return Fraction(0), None
    return Fraction(best, space.scale()), best_quad


def max_defect(space: FiniteMetricSpace) -> tuple[Fraction, Optional[QuadrupleWitness]]:
    """Largest four-point defect over all 4-subsets, with a witness."""
    if len(space) < 4:
        return Fraction(0), None
    if len(space) <= _NUMPY_QUAD_THRESHOLD:
        defect, quad = _max_defect_small(space)
    else:
        defect, quad = _max_defect_numpy(space)
    if quad is None:
        return defect, None
    labels = tuple(space.points[t] for t in quad)
    return defect, QuadrupleWitness.from_space(space, labels)


def is_metric_fast(space: FiniteMetricSpace) -> bool:
    """Vectorized metric-axiom check on the scaled integer matrix."""
    D = space.int_matrix()
    n = len(space)
    if D.shape != (n, n):
        return False
    if np.any(np.diag(D) != 0) or np.any(D != D.T):
        return False
    off = D[~np.eye(n, dtype=bool)]
    if off.size and off.min() <= 0:
        return False
    for k in range(n):
        if np.any(D > D[:, k][:, None] + D[k, :][None, :]):
            return False
    return True


def max_defect_touching(space: FiniteMetricSpace, labels: Iterable[Label]
                        ) -> tuple[Fraction, Optional[QuadrupleWitness]]:
    """Largest defect over quadruples meeting ``labels``.

    Together with hyperbolicity of the complementary subspace this bounds
    the defect of the whole space, so stage growth can be re-verified
    incrementally.
    """
    touch = sorted({space.index(p) for p in labels})
    n = len(space)
    if n < 4 or not touch:
        return Fraction(0), None
    D = space.int_matrix()
    best = 0
    best_quad = None
    for w in touch:
        others = np.array([t for t in range(n) if t != w], dtype=np.int64)
        m = len(others)
        for ai in range(m - 2):
            i = int(others[ai])
            rest = others[ai + 1:]
            j_rel, k_rel = np.triu_indices(len(rest), k=1)
            if len(j_rel) == 0:
                continue
            j_idx = rest[j_rel]
            k_idx = rest[k_rel]
            s1 = D[i, j_idx] + D[k_idx, w]
            s2 = D[i, k_idx] + D[j_idx, w]
            s3 = D[i, w] + D[j_idx, k_idx]
            stack = np.stack((s1, s2, s3))
            defect = 2 * stack.max(axis=0) + stack.min(axis=0) - stack.sum(axis=0)
            pos = int(defect.argmax())
            if defect[pos] > best:
                best = int(defect[pos])
                best_quad = (i, int(j_idx[pos]), int(k_idx[pos]), w)
    if best <= 0:
        return Fraction(0), None
    quad_labels = tuple(space.points[t] for t in best_quad)
    return Fraction(best, space.scale()), QuadrupleWitness.from_space(space, quad_labels)


def is_delta_hyperbolic(space: FiniteMetricSpace, delta: Fraction
                        ) -> tuple[bool, Optional[QuadrupleWitness]]:
    """Four-point condition at threshold ``2*delta``.

    Returns ``(True, None)`` or ``(False, maximal-defect witness)``.
    """
    delta = Fraction(delta)
    if delta < 0:
        raise InputError("delta must be nonnegative")
    defect, witness = max_defect(space)
    if defect <= 2 * delta:
        return True, None
    return False, witness


def min_hyperbolicity(space: FiniteMetricSpace) -> Fraction:
    """The least delta for which the space passes the four-point condition."""
    defect, _ = max_defect(space)
    return defect / 2


def is_geodetic(space: FiniteMetricSpace, labels: Sequence[Label]) -> bool:
    """True iff the endpoint distance equals the sum of consecutive hops."""
    if len(labels) < 2:
        raise InputError("a geodetic tuple needs at least 2 points")
    total = sum(space.d(labels[t], labels[t + 1]) for t in range(len(labels) - 1))
    return space.d(labels[0], labels[-1]) == total
