from fractions import Fraction

import pytest

from hypspace.space import FiniteMetricSpace


def line_space(coords):
    """Points on a line at the given rational coordinates."""
    pts = [str(c) for c in coords]
    vals = [Fraction(c) for c in coords]
    rows = [[abs(a - b) for b in vals] for a in vals]
    return FiniteMetricSpace(pts, rows)


def cycle4():
    """Unit 4-cycle graph metric: adjacent 1, opposite 2."""
    d = [[0, 1, 2, 1],
         [1, 0, 1, 2],
         [2, 1, 0, 1],
         [1, 2, 1, 0]]
    return FiniteMetricSpace(["v0", "v1", "v2", "v3"], d)


def tripod(a, b, c):
    """Star with center 'c0' and leaves x,y,z at the given arm lengths."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    pts = ["c0", "x", "y", "z"]
    arms = {"c0": Fraction(0), "x": a, "y": b, "z": c}
    rows = [[(arms[p] + arms[q] if p != q and "c0" not in (p, q) else abs(arms[p] - arms[q]))
             for q in pts] for p in pts]
    return FiniteMetricSpace(pts, rows)


def triangle(a, b, c, labels=("p", "q", "r")):
    """Three points with d(p,q)=a, d(q,r)=b, d(p,r)=c."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    rows = [[0, a, c], [a, 0, b], [c, b, 0]]
    return FiniteMetricSpace(list(labels), rows)


@pytest.fixture
def c4():
    return cycle4()
