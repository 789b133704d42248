"""Gate sets between disjoint closed subsets, projection distances, axioms.

For disjoint delta-closed subsets the two gate sets have diameter at most
delta, realize the set distance with a constant gap, and the gate map
between them is a bijective isometry; ``gate_set`` re-verifies all of that
on every call.  The projection distance of X and Z seen from Y is the
diameter of the union of their gate sets in Y, and ``check_pc_axioms``
machine-checks the four projection-complex axioms on a family.

On gate sets and closedness: when both subsets are delta-closed, their gate
sets are delta-closed too (the diameter bound makes the outside-pair
condition vacuous, and gatedness follows from the gate-map bijection).  A
gate set can fail to be delta-closed only when the hypothesis is weakened
to merely gated subsets; ``gated_not_closed_example`` returns a smallest
such instance and ``gate_set_completion_search`` documents that a natural
five-point partial instance admits no completion with both subsets gated
and a two-point gate set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterable, Optional, Sequence

from .errors import InputError, VerificationError
from .gates import gate, is_delta_closed, is_gated
from .space import FiniteMetricSpace, Label, validate_metric


def diameter(space: FiniteMetricSpace, labels: Iterable[Label]) -> Fraction:
    pts = list(labels)
    if not pts:
        raise InputError("diameter of an empty set")
    return max((space.d(a, b) for a, b in combinations(pts, 2)),
               default=Fraction(0))


def set_distance(space: FiniteMetricSpace, left: Iterable[Label],
                 right: Iterable[Label]) -> Fraction:
    return min(space.d(a, b) for a in left for b in right)


@dataclass(frozen=True)
class GateSetPair:
    left: tuple[Label, ...]
    right: tuple[Label, ...]
    left_gates: tuple[Label, ...]     # gates in left of right's points
    right_gates: tuple[Label, ...]
    separation: Fraction              # d(left, right), realized by every gate


def gate_set(space: FiniteMetricSpace, left: Sequence[Label],
             right: Sequence[Label], delta: Fraction) -> GateSetPair:
    """Pointwise gate sets of two disjoint delta-closed subsets.

    All structural guarantees are re-verified; a failure raises
    ``VerificationError`` because it would contradict closedness.
    """
    delta = Fraction(delta)
    left = tuple(sorted(set(left), key=space.index))
    right = tuple(sorted(set(right), key=space.index))
    if set(left) & set(right):
        raise InputError("subsets must be disjoint")
    for name, sub in (("left", left), ("right", right)):
        rep = is_delta_closed(space, sub, delta)
        if not rep.verdict:
            raise InputError(f"{name} subset is not delta-closed: {rep.witness}")

    lg = {}
    for b in right:
        g = gate(space, left, b).gate
        if g is None:
            raise VerificationError("closed subset lost a gate", witness=b)
        lg[b] = g
    rg = {}
    for a in left:
        g = gate(space, right, a).gate
        if g is None:
            raise VerificationError("closed subset lost a gate", witness=a)
        rg[a] = g
    left_gates = tuple(sorted(set(lg.values()), key=space.index))
    right_gates = tuple(sorted(set(rg.values()), key=space.index))

    sep = set_distance(space, left, right)
    if diameter(space, left_gates) > delta or diameter(space, right_gates) > delta:
        raise VerificationError("gate set diameter exceeds delta",
                                witness=(left_gates, right_gates))
    for a in left_gates:
        if space.d(a, rg[a]) != sep:
            raise VerificationError("gate distance is not constant",
                                    witness=(a, rg[a]))
    # gate map restricted to the gate set: bijective isometry
    image = {a: rg[a] for a in left_gates}
    if sorted(set(image.values()), key=space.index) != list(right_gates):
        raise VerificationError("gate map is not onto the opposite gate set",
                                witness=image)
    for a, a2 in combinations(left_gates, 2):
        if space.d(a, a2) != space.d(image[a], image[a2]):
            raise VerificationError("gate map is not an isometry", witness=(a, a2))
    # interchange: gates of the opposite gate set already produce the gate set
    back = {gate(space, left, b).gate for b in right_gates}
    if tuple(sorted(back, key=space.index)) != left_gates:
        raise VerificationError("gate-set interchange failed", witness=back)
    return GateSetPair(left=left, right=right, left_gates=left_gates,
                       right_gates=right_gates, separation=sep)


def proj_distance(space: FiniteMetricSpace, base: Sequence[Label],
                  first: Sequence[Label], second: Sequence[Label],
                  delta: Fraction) -> Fraction:
    """diam of the union of the gate sets of ``first`` and ``second`` in
    ``base``; all three subsets pairwise disjoint and delta-closed."""
    gs1 = gate_set(space, base, first, delta)
    gs2 = gate_set(space, base, second, delta)
    union = set(gs1.left_gates) | set(gs2.left_gates)
    return diameter(space, union)


@dataclass(frozen=True)
class BetweenReport:
    projection: Fraction
    applies: bool                 # projection > delta
    separation_ok: Optional[bool]  # the strict inequality, when it applies
    details: tuple[Fraction, Fraction, Fraction]  # d(X,Z), d(X,Y), d(Y,Z)

    @property
    def ok(self) -> bool:
        return (not self.applies) or bool(self.separation_ok)


def check_between(space: FiniteMetricSpace, first: Sequence[Label],
                  base: Sequence[Label], second: Sequence[Label],
                  delta: Fraction) -> BetweenReport:
    """If the projection of X and Z onto Y exceeds delta, then
    d(X,Z) > d(X,Y) + d(Y,Z) + delta must hold."""
    dproj = proj_distance(space, base, first, second, delta)
    dxz = set_distance(space, first, second)
    dxy = set_distance(space, first, base)
    dyz = set_distance(space, base, second)
    if dproj <= delta:
        return BetweenReport(dproj, False, None, (dxz, dxy, dyz))
    return BetweenReport(dproj, True, dxz > dxy + dyz + delta, (dxz, dxy, dyz))


@dataclass
class ProjectionTable:
    family: list[tuple[Label, ...]]
    values: dict[tuple[int, int, int], Fraction] = field(default_factory=dict)

    def value(self, base: int, first: int, second: int) -> Fraction:
        key = (base,) + tuple(sorted((first, second)))
        return self.values[key]

    def to_obj(self) -> dict:
        from .rational import format_rational
        return {
            "family": [list(m) for m in self.family],
            "projections": [
                {"base": k[0], "first": k[1], "second": k[2],
                 "value": format_rational(v)}
                for k, v in sorted(self.values.items())],
        }


def projection_table(space: FiniteMetricSpace, family: Sequence[Sequence[Label]],
                     delta: Fraction) -> ProjectionTable:
    family = [tuple(sorted(set(m), key=space.index)) for m in family]
    table = ProjectionTable(family=family)
    for y in range(len(family)):
        for x, z in combinations([t for t in range(len(family)) if t != y], 2):
            v = proj_distance(space, family[y], family[x], family[z], delta)
            table.values[(y, x, z)] = v
    return table


@dataclass
class AxiomReport:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)


@dataclass
class PCReport:
    axioms: list[AxiomReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(a.passed for a in self.axioms)


def check_pc_axioms(space: FiniteMetricSpace, family: Sequence[Sequence[Label]],
                    delta: Fraction) -> PCReport:
    """The four projection-complex axioms on a pairwise disjoint delta-closed
    family, with the quantitative count bound for the fourth."""
    delta = Fraction(delta)
    if delta <= 0:
        raise InputError("projection axioms require delta > 0")
    family = [tuple(sorted(set(m), key=space.index)) for m in family]
    for a, b in combinations(range(len(family)), 2):
        if set(family[a]) & set(family[b]):
            raise InputError(f"family members {a} and {b} overlap")
    for m in family:
        rep = is_delta_closed(space, m, delta)
        if not rep.verdict:
            raise InputError(f"family member {m} is not delta-closed: {rep.witness}")

    table = projection_table(space, family, delta)
    k = len(family)
    report = PCReport()

    sym = AxiomReport("PC1 symmetry", True)
    for y in range(k):
        for x, z in combinations([t for t in range(k) if t != y], 2):
            forward = table.value(y, x, z)
            backward = proj_distance(space, family[y], family[z], family[x], delta)
            if forward != backward:
                sym.passed = False
                sym.witnesses.append((y, x, z, forward, backward))
    report.axioms.append(sym)

    tri = AxiomReport("PC2 triangle", True)
    for y in range(k):
        others = [t for t in range(k) if t != y]
        for x, z, w in permutations(others, 3):
            if table.value(y, x, z) + table.value(y, z, w) < table.value(y, x, w):
                tri.passed = False
                tri.witnesses.append((y, x, z, w))
    report.axioms.append(tri)

    crossed = AxiomReport("PC3 crossed smallness", True)
    for x in range(k):
        for y, z in permutations([t for t in range(k) if t != x], 2):
            if min(table.value(y, x, z), table.value(z, x, y)) > delta:
                crossed.passed = False
                crossed.witnesses.append((x, y, z))
    report.axioms.append(crossed)

    finite = AxiomReport("PC4 large projections", True)
    for x, z in combinations(range(k), 2):
        count = sum(1 for y in range(k)
                    if y != x and y != z and table.value(y, x, z) > delta)
        bound = set_distance(space, family[x], family[z]) / delta
        if count > bound:
            finite.passed = False
            finite.witnesses.append((x, z, count, bound))
        else:
            finite.witnesses.append((x, z, count, bound))
    report.axioms.append(finite)
    return report


# -- gate sets of merely gated subsets ---------------------------------------

def gated_not_closed_example():
    """Smallest verified instance of a non-closed gate set.

    In the unit 4-cycle with delta = 1/2, the adjacent pairs A = {v0,v1} and
    B = {v2,v3} are both gated (not delta-closed), and the gate set of B in
    A is all of A: diameter 1 > delta, and the outside pair (v2,v3) breaks
    the decomposition condition.  For *delta-closed* disjoint subsets this
    cannot happen, see the module docstring.
    """
    d = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    space = FiniteMetricSpace(["v0", "v1", "v2", "v3"], d)
    delta = Fraction(1, 2)
    a_set, b_set = ("v0", "v1"), ("v2", "v3")
    assert is_gated(space, a_set)[0] and is_gated(space, b_set)[0]
    gates = tuple(sorted({gate(space, a_set, b).gate for b in b_set}))
    assert gates == a_set
    assert not is_delta_closed(space, gates, delta).verdict
    return space, a_set, b_set, delta


def gate_set_forced_completions(delta: Fraction = Fraction(1)):
    """Analytic completion search for the five-point partial instance.

    Base: A = {x0,x1,x2}, B = {y0,y2} with d(x0,y0)=d(x2,y2)=d(x0,x2)=
    d(y0,y2)=delta, d(x1,x0)=delta/3, d(x1,x2)=2delta/3; the distances
    d(x1,y0), d(x1,y2), d(x0,y2), d(x2,y0) are free.  If the gates of y0,y2
    in A are prescribed, the gate equations force all four unknowns, so
    checking every gate assignment covers every real completion.  Returns a
    list of (assignment, completion, a_gated, b_gated, gate_set) analyses.
    """
    delta = Fraction(delta)
    base = {
        ("x0", "x1"): delta / 3, ("x1", "x2"): 2 * delta / 3,
        ("x0", "x2"): delta, ("y0", "y2"): delta,
        ("x0", "y0"): delta, ("x2", "y2"): delta,
    }
    points = ["x0", "x1", "x2", "y0", "y2"]
    a_set, b_set = ["x0", "x1", "x2"], ["y0", "y2"]

    def base_d(u, v):
        if u == v:
            return Fraction(0)
        return base.get((u, v)) or base.get((v, u))

    results = []
    for g0, g2 in product(a_set, repeat=2):
        # gate equations d(y,a) = d(y,g) + d(g,a) force the unknowns
        comp = dict(base)

        def forced(y, g, a):
            return base_d(y, g) + base_d(g, a)

        if base_d("y0", g0) is None or base_d("y2", g2) is None:
            continue
        comp[("x1", "y0")] = forced("y0", g0, "x1")
        comp[("y0", "x2") if g0 != "x2" else ("x2", "y0")] = forced("y0", g0, "x2")
        comp[("x0", "y0")] = forced("y0", g0, "x0")
        comp[("x1", "y2")] = forced("y2", g2, "x1")
        comp[("x0", "y2")] = forced("y2", g2, "x0")
        comp[("x2", "y2")] = forced("y2", g2, "x2")
        # the fixed base distances must survive the forcing
        if comp[("x0", "y0")] != delta or comp[("x2", "y2")] != delta:
            continue

        def dd(u, v):
            if u == v:
                return Fraction(0)
            return comp.get((u, v), comp.get((v, u)))

        rows = [[dd(u, v) for v in points] for u in points]
        if any(v is None or (u != w and v <= 0)
               for u, row in zip(points, rows) for w, v in zip(points, row)):
            continue
        if validate_metric(points, rows):
            continue
        space = FiniteMetricSpace(points, rows, validate=False)
        a_ok, _ = is_gated(space, a_set)
        b_ok, _ = is_gated(space, b_set)
        gates = tuple(sorted({gate(space, a_set, b).gate for b in b_set
                              if gate(space, a_set, b).gate is not None}))
        results.append({
            "assignment": (g0, g2),
            "completion": {f"{u},{v}": comp[(u, v)] for (u, v) in comp},
            "a_gated": a_ok,
            "b_gated": b_ok,
            "gate_set": gates,
        })
    return results


def gate_set_completion_search(delta: Fraction = Fraction(1),
                               denominator: int = 6,
                               max_multiple: Optional[int] = None) -> list:
    """Grid oracle for the same search: all completions on the grid
    ``k/denominator * delta`` with both subsets gated and gate set {x0,x2}.

    Expected empty; kept as a redundant cross-check of the analytic search.
    """
    delta = Fraction(delta)
    if max_multiple is None:
        max_multiple = 3 * denominator
    points = ["x0", "x1", "x2", "y0", "y2"]
    a_set, b_set = ["x0", "x1", "x2"], ["y0", "y2"]
    base = {
        ("x0", "x1"): delta / 3, ("x1", "x2"): 2 * delta / 3,
        ("x0", "x2"): delta, ("y0", "y2"): delta,
        ("x0", "y0"): delta, ("x2", "y2"): delta,
    }
    grid = [Fraction(k, denominator) * delta for k in range(1, max_multiple + 1)]
    hits = []
    for p, q, s, t in product(grid, repeat=4):
        comp = dict(base)
        comp[("x1", "y0")] = p
        comp[("x1", "y2")] = q
        comp[("x0", "y2")] = s
        comp[("x2", "y0")] = t

        def dd(u, v):
            if u == v:
                return Fraction(0)
            return comp.get((u, v), comp.get((v, u)))

        rows = [[dd(u, v) for v in points] for u in points]
        if validate_metric(points, rows):
            continue
        space = FiniteMetricSpace(points, rows, validate=False)
        if not is_gated(space, a_set)[0] or not is_gated(space, b_set)[0]:
            continue
        gates = tuple(sorted({gate(space, a_set, b).gate for b in b_set}))
        if gates == ("x0", "x2"):
            hits.append((p, q, s, t))
    return hits


def random_gate_set_harness(space: FiniteMetricSpace, delta: Fraction,
                            rng: random.Random, rounds: int = 50) -> int:
    """Drive gate_set on random disjoint delta-closed pairs; returns how
    many pairs were exercised.  Any invariant failure raises."""
    from .generate import disjoint_closed_family
    done = 0
    for _ in range(rounds):
        fam = disjoint_closed_family(rng, space, delta, want=2)
        if fam is None:
            continue
        gate_set(space, fam[0], fam[1], delta)
        done += 1
    return done
