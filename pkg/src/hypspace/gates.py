"""Gates, gated subsets, delta-closedness, convexity and closures.

A subset ``A`` is *gated* when every outside point ``b`` has a gate: a point
``g`` in ``A`` with ``d(b,a) = d(b,g) + d(g,a)`` for every ``a`` in ``A``.
The gate, when it exists, is the unique nearest point of ``A``.

``A`` is *delta-closed* when it is gated and, for outside points ``b, b'``
whose gates are more than ``delta`` apart, the distance ``d(b,b')``
decomposes through both gates.  Delta-closedness is transitive, stable
under nonempty intersections, and every nonempty subset has a unique
smallest delta-closed superset (its closure).

The closure algorithm grows the seed by two sound forcing rules (geodetic
betweenness, and absence of any external gate candidate) and falls back to
a minimal-superset search only when the forced set is not already closed.
Whenever the forced set is delta-closed it *is* the closure, because forced
points belong to every delta-closed superset.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, ResourceLimitError
from .space import FiniteMetricSpace, Label

# Fallback search budget for `closure` (number of candidate supersets).
DEFAULT_CLOSURE_BUDGET = 500_000


@dataclass(frozen=True)
class GateResult:
    base: Label
    subset: tuple[Label, ...]
    gate: Optional[Label]


@dataclass(frozen=True)
class ClosednessReport:
    """Verdict of a delta-closedness check with a re-checkable witness.

    ``witness`` is ``("gateless", b)`` when some outside point has no gate,
    or ``("pair", b, b2)`` when condition (2) fails for an outside pair.
    """

    subset: tuple[Label, ...]
    delta: Fraction
    verdict: bool
    witness: Optional[tuple] = None


def _subset_indices(space: FiniteMetricSpace, subset: Iterable[Label]) -> list[int]:
    idx = sorted({space.index(p) for p in subset})
    if not idx:
        raise InputError("the empty set is not gated")
    return idx


def _gate_idx(rows, a_idx: Sequence[int], b: int) -> Optional[int]:
    """Index of the gate of b in A, or None.  b may be in A (gate is b)."""
    if b in a_idx:
        return b
    row = rows[b]
    best = None
    best_d = None
    for a in a_idx:
        v = row[a]
        if best_d is None or v < best_d:
            best, best_d = a, v
        elif v == best_d:
            best = -1  # tie: no unique nearest point, hence no gate
    if best == -1:
        return None
    grow = rows[best]
    for a in a_idx:
        if row[a] != best_d + grow[a]:
            return None
    return best


def gate(space: FiniteMetricSpace, subset: Iterable[Label], base: Label) -> GateResult:
    """Gate of ``base`` in ``subset``; for a member point the gate is itself."""
    a_idx = _subset_indices(space, subset)
    b = space.index(base)
    g = _gate_idx(space.int_rows(), a_idx, b)
    return GateResult(base=base,
                      subset=tuple(space.points[i] for i in a_idx),
                      gate=None if g is None else space.points[g])


def gate_map(space: FiniteMetricSpace, subset: Iterable[Label]) -> dict[Label, Optional[Label]]:
    """Gates of every outside point, as a label map (None where gateless)."""
    a_idx = _subset_indices(space, subset)
    rows = space.int_rows()
    out = {}
    aset = set(a_idx)
    for b in range(len(space)):
        if b in aset:
            continue
        g = _gate_idx(rows, a_idx, b)
        out[space.points[b]] = None if g is None else space.points[g]
    return out


def is_gated(space: FiniteMetricSpace, subset: Iterable[Label]
             ) -> tuple[bool, Optional[Label]]:
    """Whether every outside point has a gate; witness is the first without."""
    a_idx = _subset_indices(space, subset)
    rows = space.int_rows()
    aset = set(a_idx)
    for b in range(len(space)):
        if b not in aset and _gate_idx(rows, a_idx, b) is None:
            return False, space.points[b]
    return True, None


def _closed_check(space: FiniteMetricSpace, a_idx: list[int], delta_scaled: int):
    """(verdict, witness, gates) on the scaled-integer matrix."""
    rows = space.int_rows()
    n = len(space)
    aset = set(a_idx)
    outside = [b for b in range(n) if b not in aset]
    gates = {}
    for b in outside:
        g = _gate_idx(rows, a_idx, b)
        if g is None:
            return False, ("gateless", space.points[b]), None
        gates[b] = g
    for i, b in enumerate(outside):
        gb = gates[b]
        row_b = rows[b]
        for b2 in outside[i + 1:]:
            g2 = gates[b2]
            dg = rows[gb][g2]
            if dg > delta_scaled:
                if row_b[b2] != row_b[gb] + dg + rows[g2][b2]:
                    return False, ("pair", space.points[b], space.points[b2]), None
    return True, None, gates


def is_delta_closed(space: FiniteMetricSpace, subset: Iterable[Label],
                    delta: Fraction) -> ClosednessReport:
    """Gatedness plus the outside-pair decomposition condition."""
    delta = Fraction(delta)
    if delta < 0:
        raise InputError("delta must be nonnegative")
    a_idx = _subset_indices(space, subset)
    ds = space.scaled(delta)
    if ds is None:
        # delta not on the matrix grid: compare against floor in scaled units
        ds = int(delta * space.scale())
    verdict, witness, _ = _closed_check(space, a_idx, ds)
    return ClosednessReport(subset=tuple(space.points[i] for i in a_idx),
                            delta=delta, verdict=verdict, witness=witness)


def minimal_closedness_delta(space: FiniteMetricSpace, subset: Iterable[Label]
                             ) -> Optional[Fraction]:
    """Least delta making the subset delta-closed, or None if not gated."""
    a_idx = _subset_indices(space, subset)
    rows = space.int_rows()
    aset = set(a_idx)
    outside = [b for b in range(len(space)) if b not in aset]
    gates = {}
    for b in outside:
        g = _gate_idx(rows, a_idx, b)
        if g is None:
            return None
        gates[b] = g
    worst = 0
    for i, b in enumerate(outside):
        gb = gates[b]
        for b2 in outside[i + 1:]:
            g2 = gates[b2]
            dg = rows[gb][g2]
            if dg > worst and rows[b][b2] != rows[b][gb] + dg + rows[g2][b2]:
                worst = dg
    return Fraction(worst, space.scale())


def convex_closure(space: FiniteMetricSpace, subset: Iterable[Label]) -> tuple[Label, ...]:
    """Least fixed point of adding points geodetically between two members."""
    t_idx = set(_subset_indices(space, subset))
    rows = space.int_rows()
    n = len(space)
    grew = True
    while grew:
        grew = False
        for z in range(n):
            if z in t_idx:
                continue
            rz = rows[z]
            for t1, t2 in combinations(t_idx, 2):
                if rows[t1][t2] == rows[t1][z] + rz[t2]:
                    t_idx.add(z)
                    grew = True
                    break
    return tuple(space.points[i] for i in sorted(t_idx))


def _forced_points(space: FiniteMetricSpace, t_idx: set[int]) -> set[int]:
    """Grow by the two sound forcing rules until a joint fixed point.

    Rule 1 (betweenness): any point geodetically between two members lies in
    every gated superset, by convexity.
    Rule 2 (no gate candidate): if no point g outside {z} satisfies the gate
    equations over the current set, then z cannot stay outside any
    delta-closed superset, whose gate for z would be such a candidate.
    """
    rows = space.int_rows()
    n = len(space)
    t_idx = set(t_idx)
    grew = True
    while grew:
        grew = False
        for z in range(n):
            if z in t_idx:
                continue
            rz = rows[z]
            forced = False
            for t1, t2 in combinations(t_idx, 2):
                if rows[t1][t2] == rows[t1][z] + rz[t2]:
                    forced = True
                    break
            if not forced:
                has_candidate = False
                for g in range(n):
                    if g == z:
                        continue
                    rg = rows[g]
                    base = rz[g]
                    if all(rz[t] == base + rg[t] for t in t_idx):
                        has_candidate = True
                        break
                forced = not has_candidate
            if forced:
                t_idx.add(z)
                grew = True
    return t_idx


def closure(space: FiniteMetricSpace, subset: Iterable[Label], delta: Fraction,
            budget: int = DEFAULT_CLOSURE_BUDGET) -> tuple[Label, ...]:
    """Smallest delta-closed superset of ``subset``.

    The whole space is vacuously delta-closed, so the closure always exists,
    and it is unique because delta-closed sets intersect to delta-closed
    sets.  Forced growth usually reaches it directly; otherwise supersets are
    searched in increasing size, where the first closed one found is minimal
    and hence the closure.
    """
    delta = Fraction(delta)
    if delta < 0:
        raise InputError("delta must be nonnegative")
    seed = set(_subset_indices(space, subset))
    ds = space.scaled(delta)
    if ds is None:
        ds = int(delta * space.scale())
    t_idx = _forced_points(space, seed)
    verdict, _, _ = _closed_check(space, sorted(t_idx), ds)
    if verdict:
        return tuple(space.points[i] for i in sorted(t_idx))
    rest = [i for i in range(len(space)) if i not in t_idx]
    tried = 0
    for extra_size in range(1, len(rest) + 1):
        for extra in combinations(rest, extra_size):
            tried += 1
            if tried > budget:
                raise ResourceLimitError(
                    f"closure search exceeded {budget} candidates",
                    partial=tuple(space.points[i] for i in sorted(t_idx)))
            cand = sorted(t_idx | set(extra))
            verdict, _, _ = _closed_check(space, cand, ds)
            if verdict:
                return tuple(space.points[i] for i in cand)
    return tuple(space.points)


def delta_closed_subsets(space: FiniteMetricSpace, delta: Fraction,
                         max_size: Optional[int] = None,
                         limit: Optional[int] = None):
    """Yield all delta-closed subsets (as label tuples) up to ``max_size``."""
    delta = Fraction(delta)
    n = len(space)
    ds = space.scaled(delta)
    if ds is None:
        ds = int(delta * space.scale())
    top = n if max_size is None else min(max_size, n)
    seen = 0
    for size in range(1, top + 1):
        for comb in combinations(range(n), size):
            verdict, _, _ = _closed_check(space, list(comb), ds)
            if verdict:
                yield tuple(space.points[i] for i in comb)
                seen += 1
                if limit is not None and seen >= limit:
                    return


def delta_closed_pairs(space: FiniteMetricSpace, delta: Fraction) -> list[tuple[Label, Label]]:
    """All delta-closed 2-subsets, in one vectorized sweep.

    Semantics match ``is_delta_closed`` on each pair; this exists because
    stage-level scans check tens of thousands of pairs.
    """
    delta = Fraction(delta)
    n = len(space)
    if n < 2:
        return []
    D = space.int_matrix()
    ds = space.scaled(delta)
    if ds is None:
        ds = int(delta * space.scale())
    out = []
    all_idx = np.arange(n)
    for x in range(n):
        dx = D[x]
        for y in range(x + 1, n):
            dy = D[y]
            dxy = D[x, y]
            mask = (all_idx != x) & (all_idx != y)
            gx = dy[mask] == dx[mask] + dxy   # gate of outside point is x
            gy = dx[mask] == dy[mask] + dxy   # gate is y
            if not bool(np.all(gx | gy)):
                continue
            if dxy > ds:
                ox = all_idx[mask][gx & ~gy]
                oy = all_idx[mask][gy & ~gx]
                # points "beyond" x vs "beyond" y must see each other through x,y
                if ox.size and oy.size:
                    need = dx[ox][:, None] + dxy + dy[oy][None, :]
                    if not bool(np.all(D[np.ix_(ox, oy)] == need)):
                        continue
            out.append((space.points[x], space.points[y]))
    return out
