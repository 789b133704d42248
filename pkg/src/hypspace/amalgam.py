"""Canonical amalgams over shared delta-closed subspaces, and marked spaces.

The canonical amalgam of two spaces over a common delta-closed subspace A
keeps both host metrics and routes every cross distance through the gates
in A: ``d(x,y) = d(x,gate(x)) + d(gate(x),gate(y)) + d(gate(y),y)``.  When
both hosts are delta-hyperbolic the result is delta-hyperbolic and both
hosts sit delta-closed inside it; ``check_amalgamation_lemma`` re-verifies
all of that by brute force rather than trusting it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import InputError, VerificationError
from .gates import ClosednessReport, gate_map, is_delta_closed
from .space import (FiniteMetricSpace, Label, QuadrupleWitness, is_delta_hyperbolic,
                    is_metric_fast, validate_metric)


class ClosednessPreconditionError(InputError):
    """A shared subspace failed to be delta-closed in a host."""

    def __init__(self, side: str, report: ClosednessReport):
        super().__init__(f"shared subspace is not delta-closed in {side} host: "
                         f"witness {report.witness}")
        self.side = side
        self.report = report


@dataclass(frozen=True)
class AmalgamSpec:
    """Two hosts plus the label correspondence identifying the shared part.

    ``shared`` lists (left label, right label) pairs; the paired subsets must
    be isometric and delta-closed in their hosts.
    """

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    shared: tuple[tuple[Label, Label], ...]
    delta: Fraction

    def __post_init__(self):
        if not self.shared:
            raise InputError("shared subspace must be nonempty")
        lefts = [p for p, _ in self.shared]
        rights = [q for _, q in self.shared]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise InputError("shared correspondence repeats a label")
        for p in lefts:
            self.left.index(p)
        for q in rights:
            self.right.index(q)
        for (p1, q1) in self.shared:
            for (p2, q2) in self.shared:
                if self.left.d(p1, p2) != self.right.d(q1, q2):
                    raise InputError(
                        f"correspondence is not isometric: d({p1},{p2}) != d({q1},{q2})")


@dataclass(frozen=True)
class Amalgam:
    """Result space plus the embeddings of both hosts into it."""

    space: FiniteMetricSpace
    left_map: dict[Label, Label]
    right_map: dict[Label, Label]
    shared_labels: tuple[Label, ...]


def _fresh_label(label: Label, used: set[Label]) -> Label:
    cand = label
    while cand in used:
        cand = cand + "~2"
    return cand


def canonical_amalgam(spec: AmalgamSpec, check_result: bool = True) -> Amalgam:
    """Glue the hosts along the shared subspace, routing through gates."""
    left, right = spec.left, spec.right
    shared_left = [p for p, _ in spec.shared]
    shared_right = [q for _, q in spec.shared]
    rep_left = is_delta_closed(left, shared_left, spec.delta)
    if not rep_left.verdict:
        raise ClosednessPreconditionError("left", rep_left)
    rep_right = is_delta_closed(right, shared_right, spec.delta)
    if not rep_right.verdict:
        raise ClosednessPreconditionError("right", rep_right)

    right_to_left = dict(zip(shared_right, shared_left))
    left_rest = [p for p in left.points if p not in set(shared_left)]
    right_rest = [q for q in right.points if q not in set(shared_right)]

    # result labels: left labels as-is; right-only labels renamed on collision
    used = set(left.points)
    right_names = {}
    for q in right_rest:
        name = _fresh_label(q, used)
        right_names[q] = name
        used.add(name)

    points: list[Label] = list(left.points) + [right_names[q] for q in right_rest]
    left_map = {p: p for p in left.points}
    right_map = {q: right_to_left[q] for q in shared_right}
    right_map.update(right_names)

    gates_left = gate_map(left, shared_left)    # left-rest label -> shared-left label
    gates_right = gate_map(right, shared_right)

    n = len(points)
    pos = {p: i for i, p in enumerate(points)}
    rows = [[Fraction(0)] * n for _ in range(n)]

    def put(a: Label, b: Label, v: Fraction):
        rows[pos[a]][pos[b]] = v
        rows[pos[b]][pos[a]] = v

    for i, p in enumerate(left.points):
        for j in range(i + 1, len(left.points)):
            put(p, left.points[j], left.d(p, left.points[j]))
    for i, q in enumerate(right.points):
        for j in range(i + 1, len(right.points)):
            q2 = right.points[j]
            put(right_map[q], right_map[q2], right.d(q, q2))
    for x in left_rest:
        gx = gates_left[x]
        dxg = left.d(x, gx)
        for y in right_rest:
            gy = gates_right[y]
            cross = dxg + left.d(gx, right_to_left[gy]) + right.d(gy, y)
            put(x, right_names[y], cross)

    space = FiniteMetricSpace(points, rows, validate=False)
    if check_result and not is_metric_fast(space):
        bad = validate_metric(space.points, space.dist)
        raise VerificationError("canonical amalgam failed the metric axioms",
                                witness=bad[0] if bad else None)
    return Amalgam(space=space, left_map=left_map, right_map=right_map,
                   shared_labels=tuple(shared_left))


@dataclass
class AmalgamationReport:
    """Outcome of re-verifying the gluing lemma on one instance."""

    precondition_failures: list = field(default_factory=list)
    conclusion_failures: list = field(default_factory=list)
    amalgam: Optional[Amalgam] = None
    hyperbolicity_witness: Optional[QuadrupleWitness] = None

    @property
    def ok(self) -> bool:
        return not self.precondition_failures and not self.conclusion_failures


def check_amalgamation_lemma(spec: AmalgamSpec) -> AmalgamationReport:
    """Verify preconditions, build the amalgam, and brute-check conclusions."""
    report = AmalgamationReport()
    ok_l, wit_l = is_delta_hyperbolic(spec.left, spec.delta)
    if not ok_l:
        report.precondition_failures.append(("left not delta-hyperbolic", wit_l))
    ok_r, wit_r = is_delta_hyperbolic(spec.right, spec.delta)
    if not ok_r:
        report.precondition_failures.append(("right not delta-hyperbolic", wit_r))
    try:
        amalgam = canonical_amalgam(spec)
    except ClosednessPreconditionError as exc:
        report.precondition_failures.append((f"shared not closed in {exc.side}", exc.report))
        return report
    report.amalgam = amalgam
    if report.precondition_failures:
        return report

    ok_d, wit_d = is_delta_hyperbolic(amalgam.space, spec.delta)
    if not ok_d:
        report.conclusion_failures.append(("amalgam not delta-hyperbolic", wit_d))
        report.hyperbolicity_witness = wit_d
    for side, mapping in (("left", amalgam.left_map), ("right", amalgam.right_map)):
        rep = is_delta_closed(amalgam.space, mapping.values(), spec.delta)
        if not rep.verdict:
            report.conclusion_failures.append((f"{side} image not delta-closed", rep))
    return report


class MarkedSpace:
    """A space with a family of distinguished delta-closed subsets.

    The family is closed under pairwise nonempty intersection and contains
    at least one singleton.
    """

    def __init__(self, space: FiniteMetricSpace, delta: Fraction,
                 distinguished: Iterable[Iterable[Label]], validate: bool = True):
        self.space = space
        self.delta = Fraction(delta)
        fam = sorted({tuple(sorted(set(m), key=space.index)) for m in distinguished},
                     key=lambda m: (len(m), m))
        self.distinguished = tuple(fam)
        if validate:
            self._validate()

    def _validate(self):
        if not any(len(m) == 1 for m in self.distinguished):
            raise InputError("marked space needs a distinguished singleton")
        fam = {frozenset(m) for m in self.distinguished}
        for m in self.distinguished:
            rep = is_delta_closed(self.space, m, self.delta)
            if not rep.verdict:
                raise InputError(f"distinguished subset {m} is not delta-closed "
                                 f"(witness {rep.witness})")
        for a in fam:
            for b in fam:
                inter = a & b
                if inter and inter not in fam:
                    raise InputError(
                        f"family not intersection-closed: {sorted(a)} and {sorted(b)}")

    def is_distinguished(self, labels: Iterable[Label]) -> bool:
        key = tuple(sorted(set(labels), key=self.space.index))
        return key in set(self.distinguished)


def marked_amalgam(left: MarkedSpace, right: MarkedSpace,
                   shared: Sequence[tuple[Label, Label]],
                   family_cap: int = 64) -> tuple[MarkedSpace, Amalgam]:
    """Amalgamate marked spaces; the result's family collects the delta-closed
    unions of distinguished traces that agree on the shared part.

    A trace may be empty (a set living wholly in one host); nonempty traces
    must be distinguished in their host.  The family is capped at
    ``family_cap`` members, then re-closed under intersections.
    """
    if left.delta != right.delta:
        raise InputError("marked spaces carry different deltas")
    shared = tuple(shared)
    shared_left = [p for p, _ in shared]
    shared_right = [q for _, q in shared]
    if not left.is_distinguished(shared_left):
        raise InputError("shared subspace is not distinguished in the left host")
    if not right.is_distinguished(shared_right):
        raise InputError("shared subspace is not distinguished in the right host")
    spec = AmalgamSpec(left=left.space, right=right.space, shared=shared,
                       delta=left.delta)
    amalgam = canonical_amalgam(spec)
    left_to_right = dict(shared)
    shared_right_set = set(shared_right)

    candidates = set()
    left_traces = [()] + list(left.distinguished)
    right_traces = [()] + list(right.distinguished)
    for t1 in left_traces:
        t1_image = {left_to_right[p] for p in t1 if p in left_to_right}
        for t2 in right_traces:
            if not t1 and not t2:
                continue
            if set(t2) & shared_right_set != t1_image:
                continue  # traces must agree on the shared part
            union = {amalgam.left_map[p] for p in t1} | {amalgam.right_map[q] for q in t2}
            rep = is_delta_closed(amalgam.space, union, left.delta)
            if rep.verdict:
                candidates.add(tuple(sorted(union, key=amalgam.space.index)))

    fam = sorted(candidates, key=lambda m: (len(m), m))[:family_cap]
    fam_sets = {frozenset(m) for m in fam}
    changed = True
    while changed:
        changed = False
        for a in list(fam_sets):
            for b in list(fam_sets):
                inter = a & b
                if inter and inter not in fam_sets:
                    fam_sets.add(inter)
                    changed = True
    family = sorted((tuple(sorted(m, key=amalgam.space.index)) for m in fam_sets),
                    key=lambda m: (len(m), m))
    marked = MarkedSpace(amalgam.space, left.delta, family)
    return marked, amalgam
