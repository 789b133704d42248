"""Enumeration of small delta-hyperbolic spaces up to isometry.

Spaces are generated by assigning distances from the rational grid
``{p/q : q <= denominator_bound, p/q <= diameter_bound}`` pair by pair with
triangle and four-point pruning, then bucketed into isometry classes.  In
graph mode distances are integers and a space is kept only when it is the
path metric of the graph whose edges are its unit-distance pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

from .errors import InputError, ResourceLimitError
from .space import FiniteMetricSpace, Label


@dataclass(frozen=True)
class PartialIsometry:
    """A distance-preserving bijection between two labelled subsets."""

    domain: tuple[Label, ...]
    codomain: tuple[Label, ...]
    pairs: tuple[tuple[Label, Label], ...]

    @classmethod
    def from_dict(cls, mapping: dict[Label, Label]) -> "PartialIsometry":
        items = tuple(sorted(mapping.items()))
        return cls(domain=tuple(a for a, _ in items),
                   codomain=tuple(b for _, b in items), pairs=items)

    def as_dict(self) -> dict[Label, Label]:
        return dict(self.pairs)

    def is_valid(self, source: FiniteMetricSpace, target: FiniteMetricSpace) -> bool:
        m = self.as_dict()
        if len(set(m.values())) != len(m):
            return False
        try:
            for a in m:
                for b in m:
                    if source.d(a, b) != target.d(m[a], m[b]):
                        return False
        except InputError:
            return False
        return True


def isometries(source: FiniteMetricSpace, target: FiniteMetricSpace
               ) -> list[PartialIsometry]:
    """All bijective distance-preserving maps source -> target."""
    n = len(source)
    if n != len(target):
        return []
    if sorted(v for row in source.dist for v in row) != \
            sorted(v for row in target.dist for v in row):
        return []
    out: list[PartialIsometry] = []
    assigned: list[int] = []

    # candidate target rows must carry the same distance multiset
    src_profile = [tuple(sorted(row)) for row in source.dist]
    tgt_profile = [tuple(sorted(row)) for row in target.dist]

    def extend(i: int, used: set[int]):
        if i == n:
            out.append(PartialIsometry.from_dict(
                {source.points[a]: target.points[assigned[a]] for a in range(n)}))
            return
        for t in range(n):
            if t in used or src_profile[i] != tgt_profile[t]:
                continue
            if all(source.di(i, j) == target.di(t, assigned[j]) for j in range(i)):
                assigned.append(t)
                used.add(t)
                extend(i + 1, used)
                used.discard(t)
                assigned.pop()

    extend(0, set())
    return out


def are_isometric(source: FiniteMetricSpace, target: FiniteMetricSpace) -> bool:
    n = len(source)
    if n != len(target):
        return False
    if sorted(v for row in source.dist for v in row) != \
            sorted(v for row in target.dist for v in row):
        return False
    profile_src = [tuple(sorted(row)) for row in source.dist]
    profile_tgt = [tuple(sorted(row)) for row in target.dist]
    if sorted(profile_src) != sorted(profile_tgt):
        return False

    def extend(i: int, assigned: list[int], used: set[int]) -> bool:
        if i == n:
            return True
        for t in range(n):
            if t in used or profile_src[i] != profile_tgt[t]:
                continue
            if all(source.di(i, j) == target.di(t, assigned[j]) for j in range(i)):
                assigned.append(t)
                used.add(t)
                if extend(i + 1, assigned, used):
                    return True
                used.discard(t)
                assigned.pop()
        return False

    return extend(0, [], set())


@dataclass(frozen=True)
class EnumerationParams:
    delta: Fraction
    max_size: int
    denominator_bound: int
    diameter_bound: Fraction
    graph_mode: bool = False
    work_limit: int = 2_000_000

    def __post_init__(self):
        if self.max_size < 1 or self.denominator_bound < 1:
            raise InputError("size and denominator bounds must be positive")
        if Fraction(self.diameter_bound) <= 0 or Fraction(self.delta) < 0:
            raise InputError("diameter bound must be positive and delta nonnegative")
        if self.graph_mode and self.denominator_bound != 1:
            raise InputError("graph mode uses integer distances (denominator bound 1)")

    def distance_values(self) -> list[Fraction]:
        vals = set()
        diam = Fraction(self.diameter_bound)
        for q in range(1, self.denominator_bound + 1):
            p = 1
            while Fraction(p, q) <= diam:
                vals.add(Fraction(p, q))
                p += 1
        return sorted(vals)


@dataclass
class Catalog:
    params: EnumerationParams
    spaces: list[FiniteMetricSpace] = field(default_factory=list)
    complete: bool = True
    work_used: int = 0


def unit_graph_realization(space: FiniteMetricSpace):
    """(edges, None) when the space is the path metric of its unit-distance
    graph; otherwise (None, certificate)."""
    n = len(space)
    for row in space.dist:
        for v in row:
            if v.denominator != 1:
                return None, ("non_integer_distance", v)
    edges = [(i, j) for i, j in combinations(range(n), 2) if space.di(i, j) == 1]
    adj = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    for start in range(n):
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        for other in range(n):
            have = dist.get(other)
            want = int(space.di(start, other))
            if have != want:
                return None, ("distance_mismatch", space.points[start],
                              space.points[other], want, have)
    labelled = [(space.points[i], space.points[j]) for i, j in edges]
    return labelled, None


def enumerate_spaces(params: EnumerationParams) -> Catalog:
    """All spaces within the bounds, one representative per isometry class.

    Deterministic: the backtracking order is fixed, so representatives and
    their order are reproducible.  Exceeding the work limit raises
    ``ResourceLimitError`` whose ``partial`` field is the flagged catalog.
    """
    values = params.distance_values()
    delta2 = 2 * Fraction(params.delta)
    catalog = Catalog(params=params)
    buckets: dict[tuple, list[FiniteMetricSpace]] = {}
    work = 0

    def record(n: int, d: list[list[Fraction]]):
        pts = [f"p{t}" for t in range(n)]
        space = FiniteMetricSpace(pts, [row[:] for row in d], validate=False)
        if params.graph_mode:
            edges, cert = unit_graph_realization(space)
            if cert is not None:
                return
        key = (n, tuple(sorted(tuple(sorted(row)) for row in space.dist)))
        bucket = buckets.setdefault(key, [])
        for rep in bucket:
            if are_isometric(space, rep):
                return
        bucket.append(space)
        catalog.spaces.append(space)

    def fill(n: int, d: list[list[Fraction]], k: int, i: int):
        # assign d[i][k], then advance column-major within point k
        nonlocal work
        work += 1
        if work > params.work_limit:
            catalog.complete = False
            catalog.work_used = work
            raise ResourceLimitError("enumeration work limit exceeded", partial=catalog)
        for v in values:
            ok = True
            for j in range(k):
                if j == i:
                    continue
                djk = d[j][k]
                if djk is None:
                    continue
                if abs(d[i][j] - djk) > v or v > d[i][j] + djk:
                    ok = False
                    break
            if not ok:
                continue
            d[i][k] = d[k][i] = v
            if i + 1 < k:
                fill(n, d, k, i + 1)
            else:
                # point k fully assigned: prune on the four-point condition
                good = True
                for a, b, c in combinations(range(k), 3):
                    s1 = d[a][b] + d[c][k]
                    s2 = d[a][c] + d[b][k]
                    s3 = d[a][k] + d[b][c]
                    e, f, g = sorted((s1, s2, s3))
                    if g - f > delta2:
                        good = False
                        break
                if good:
                    if k + 1 == n:
                        record(n, d)
                    else:
                        fill(n, d, k + 1, 0)
            d[i][k] = d[k][i] = None

    for n in range(1, params.max_size + 1):
        if n == 1:
            record(1, [[Fraction(0)]])
            continue
        d: list[list[Optional[Fraction]]] = [[None] * n for _ in range(n)]
        for t in range(n):
            d[t][t] = Fraction(0)
        fill(n, d, 1, 0)

    catalog.work_used = work
    catalog.spaces.sort(key=lambda s: (len(s), tuple(tuple(r) for r in s.dist)))
    return catalog
