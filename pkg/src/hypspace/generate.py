"""Seeded random instance generation for property harnesses.

Random spaces come from shortest-path completion of random integer-grid
weights, so every distance is an exact multiple of ``1/denominator``.
Extensions with prescribed gates make the base space gated by construction;
the least delta that also satisfies the outside-pair condition is computed
exactly afterwards, which lets harnesses build guaranteed delta-closed
instances without rejection storms.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .amalgam import AmalgamSpec
from .errors import InputError
from .gates import closure, delta_closed_pairs, is_delta_closed, minimal_closedness_delta
from .space import FiniteMetricSpace, Label, min_hyperbolicity


def random_space(rng: random.Random, size: int, denominator: int = 1,
                 max_units: int = 12, prefix: str = "a") -> FiniteMetricSpace:
    """Random metric space via shortest-path completion of random weights."""
    if size < 1:
        raise InputError("size must be positive")
    q = denominator
    n = size
    big = max_units * 4
    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = rng.randint(1, max_units)
    # Floyd-Warshall on integer units keeps everything exact
    d = [row[:] for row in w]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            row = d[i]
            for j in range(n):
                v = dik + dk[j]
                if v < row[j]:
                    row[j] = v
    _ = big
    points = [f"{prefix}{i}" for i in range(n)]
    rows = [[Fraction(d[i][j], q) for j in range(n)] for i in range(n)]
    return FiniteMetricSpace(points, rows, validate=False)


def extend_with_gated_points(rng: random.Random, base: FiniteMetricSpace,
                             extra: int, denominator: int = 1,
                             max_units: int = 8, route_prob: float = 0.6,
                             prefix: str = "x", max_tries: int = 40) -> FiniteMetricSpace:
    """Add ``extra`` points, each routed through a chosen gate in ``base``.

    The base is gated in the result by construction.  Distances between new
    points are either routed through their gates (always consistent) or
    sampled inside the triangle-feasible interval.
    """
    q = denominator
    for _ in range(max_tries):
        labels = list(base.points)
        n0 = len(labels)
        rows = [list(r) + [None] * extra for r in base.dist]
        rows += [[None] * (n0 + extra) for _ in range(extra)]
        gates = []
        radii = []
        ok = True
        for t in range(extra):
            g = rng.randrange(n0)
            r = Fraction(rng.randint(1, max_units), q)
            gates.append(g)
            radii.append(r)
            labels.append(f"{prefix}{t}")
            k = n0 + t
            rows[k][k] = Fraction(0)
            for a in range(n0):
                v = r + base.di(g, a)
                rows[k][a] = rows[a][k] = v
            for s in range(t):
                l = n0 + s
                routed = radii[t] + base.di(gates[t], gates[s]) + radii[s]
                if rng.random() < route_prob:
                    v = routed
                else:
                    lo = Fraction(1, q)
                    hi = routed
                    for x in range(k):
                        if x == l:
                            continue
                        dxk, dxl = rows[x][k], rows[x][l]
                        if dxk is None or dxl is None:
                            continue  # that pair is assigned later
                        lo = max(lo, abs(dxk - dxl))
                        hi = min(hi, dxk + dxl)
                    if lo > hi:
                        ok = False
                        break
                    units_lo = -((-lo.numerator * q) // lo.denominator)  # ceil in 1/q units
                    units_hi = (hi.numerator * q) // hi.denominator
                    if units_lo > units_hi:
                        ok = False
                        break
                    v = Fraction(rng.randint(units_lo, units_hi), q)
                rows[k][l] = rows[l][k] = v
            if not ok:
                break
        if not ok:
            continue
        for i in range(n0 + extra):
            rows[i][i] = Fraction(0)
        try:
            return FiniteMetricSpace(labels, rows, validate=True)
        except InputError:
            continue
    raise InputError("could not sample a consistent extension")


def random_glue_spec(rng: random.Random, core_size: int, extra_left: int,
                     extra_right: int, denominator: int = 1) -> AmalgamSpec:
    """A ready-to-glue instance: shared core delta-closed in both hosts,
    both hosts delta-hyperbolic, with the least delta making all of it true."""
    core = random_space(rng, core_size, denominator, max_units=6, prefix="c")
    left = extend_with_gated_points(rng, core, extra_left, denominator, prefix="l")
    right_core = core.relabel({p: f"r.{p}" for p in core.points})
    right = extend_with_gated_points(rng, right_core, extra_right, denominator, prefix="r")
    delta = Fraction(0)
    for host, shared in ((left, core.points), (right, right_core.points)):
        need = minimal_closedness_delta(host, shared)
        if need is None:
            raise InputError("gated-by-construction host lost gatedness")
        delta = max(delta, need, min_hyperbolicity(host))
    pairs = tuple((p, f"r.{p}") for p in core.points)
    return AmalgamSpec(left=left, right=right, shared=pairs, delta=delta)


def random_subset(rng: random.Random, space: FiniteMetricSpace, max_size: int,
                  nonempty: bool = True) -> tuple[Label, ...]:
    k = rng.randint(1 if nonempty else 0, max(1, min(max_size, len(space))))
    picks = rng.sample(list(space.points), k) if k else []
    return tuple(sorted(picks, key=space.index))


def disjoint_closed_family(rng: random.Random, space: FiniteMetricSpace,
                           delta: Fraction, want: int,
                           max_member_size: int = 3,
                           tries: int = 200) -> Optional[list[tuple[Label, ...]]]:
    """Sample pairwise disjoint delta-closed subsets, or None if not found.

    Candidates are singletons, delta-closed pairs, and closures of random
    pairs that stay small.
    """
    candidates: list[tuple[Label, ...]] = [(p,) for p in space.points]
    candidates += [tuple(sorted(pq, key=space.index))
                   for pq in delta_closed_pairs(space, delta)]
    for _ in range(tries // 4):
        seed = random_subset(rng, space, 2)
        try:
            cl = closure(space, seed, delta, budget=5_000)
        except Exception:
            continue
        if len(cl) <= max_member_size:
            candidates.append(cl)
    candidates = sorted(set(candidates), key=lambda m: (len(m), m))
    for _ in range(tries):
        rng.shuffle(candidates)
        chosen: list[tuple[Label, ...]] = []
        used: set[Label] = set()
        for cand in candidates:
            if len(cand) > max_member_size or used & set(cand):
                continue
            chosen.append(cand)
            used |= set(cand)
            if len(chosen) == want:
                return [tuple(sorted(m, key=space.index)) for m in chosen]
    return None


def verified_closed_subsets(space: FiniteMetricSpace, delta: Fraction,
                            max_size: int) -> list[tuple[Label, ...]]:
    """All delta-closed subsets up to ``max_size`` (exhaustive, small spaces)."""
    out = []
    n = len(space)
    for size in range(1, min(max_size, n) + 1):
        for comb in combinations(space.points, size):
            if is_delta_closed(space, comb, delta).verdict:
                out.append(tuple(sorted(comb, key=space.index)))
    return out
