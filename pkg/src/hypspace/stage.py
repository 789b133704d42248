"""Finite stages of the universal chain, built by scheduled gluing.

A stage starts from one point and grows by gluing catalog spaces over
delta-closed images of their delta-closed subsets.  Each glue step is a
canonical amalgam, so the previous stage and the fresh copy are both
delta-closed in the result, and delta-hyperbolicity is preserved.  The
infinite limit object is represented only by its stages plus the demand
scheduler; no finite stage claims completed universality.

Demands are served fair round-robin over (catalog entry, occurrence): the
first occurrence asks for a delta-closed copy of the entry, later ones ask
for copies glued over ever different delta-closed subsets and embeddings.
The whole construction is deterministic given the seed, and the step log
replays to the same space bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .catalog import Catalog, EnumerationParams, PartialIsometry, enumerate_spaces
from .errors import InputError, ResourceLimitError, VerificationError
from .gates import (closure, delta_closed_pairs, delta_closed_subsets, gate,
                    is_delta_closed)
from .rational import format_rational, parse_rational
from .space import (FiniteMetricSpace, Label, is_delta_hyperbolic,
                    max_defect_touching)

_EMBED_LIMIT = 2_000_000


@dataclass(frozen=True)
class StageStep:
    """One glue record: enough to replay the amalgamation bit-exactly."""

    piece: FiniteMetricSpace
    piece_hash: str
    shared: tuple[tuple[Label, Label], ...]      # (stage label, piece label)
    fresh: tuple[tuple[Label, Label], ...]       # (piece label, new stage label)
    origin: str                                  # "demand" | "extension"


@dataclass
class Stage:
    """Immutable snapshot of the chain at some index."""

    space: FiniteMetricSpace
    delta: Fraction
    index: int
    step_log: tuple[StageStep, ...]
    params: Optional[EnumerationParams] = None
    seed: Optional[int] = None
    copies: tuple[tuple[Label, ...], ...] = ()
    counter: int = 1

    def home_copy(self, label: Label) -> tuple[Label, ...]:
        """The earliest glued copy containing the point (seed point: itself)."""
        for copy in self.copies:
            if label in copy:
                return copy
        return (label,)

    def distinguished_upto(self, max_size: int, limit: Optional[int] = None
                           ) -> list[tuple[Label, ...]]:
        """Delta-closed subsets up to the size cap; these are the stage's
        distinguished sets."""
        out: list[tuple[Label, ...]] = [(p,) for p in self.space.points]
        if max_size >= 2:
            out.extend(tuple(sorted(pq, key=self.space.index))
                       for pq in delta_closed_pairs(self.space, self.delta))
        if max_size >= 3:
            if len(self.space) > 24 and limit is None:
                raise ResourceLimitError(
                    "exhaustive distinguished-family scan above size 2 needs a limit "
                    f"on a {len(self.space)}-point stage", partial=out)
            for sub in delta_closed_subsets(self.space, self.delta,
                                            max_size=max_size, limit=limit):
                if len(sub) >= 3:
                    out.append(sub)
        return out


def space_hash(space: FiniteMetricSpace) -> str:
    payload = json.dumps({
        "points": list(space.points),
        "dist": [[format_rational(v) for v in row] for row in space.dist],
    }, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def seed_stage(delta: Fraction, params: Optional[EnumerationParams] = None,
               seed: Optional[int] = None) -> Stage:
    space = FiniteMetricSpace(["p0"], [[Fraction(0)]], validate=False)
    return Stage(space=space, delta=Fraction(delta), index=0, step_log=(),
                 params=params, seed=seed, copies=(), counter=1)


def _glue(stage: Stage, piece: FiniteMetricSpace,
          shared: Sequence[tuple[Label, Label]], origin: str,
          verify: str = "incremental") -> Stage:
    """Glue a piece over a delta-closed correspondence, extending the matrix
    in place of a generic amalgam: cross distances collapse to one lookup
    because both hosts route through the same gate in the shared part."""
    host = stage.space
    shared = tuple(shared)
    stage_side = [a for a, _ in shared]
    piece_side = [b for _, b in shared]
    for (a1, b1) in shared:
        for (a2, b2) in shared:
            if host.d(a1, a2) != piece.d(b1, b2):
                raise InputError("glue correspondence is not isometric")
    rep = is_delta_closed(host, stage_side, stage.delta)
    if not rep.verdict:
        raise InputError(f"glue anchor not delta-closed in stage: {rep.witness}")
    rep_p = is_delta_closed(piece, piece_side, stage.delta)
    if not rep_p.verdict:
        raise InputError(f"shared subset not delta-closed in piece: {rep_p.witness}")

    rest = [b for b in piece.points if b not in set(piece_side)]
    fresh_names = []
    counter = stage.counter
    for b in rest:
        fresh_names.append(f"p{counter}")
        counter += 1
    fresh = tuple(zip(rest, fresh_names))
    to_stage = dict(zip(piece_side, stage_side))

    # gate of each rest point inside the shared subset, computed in the piece
    gates = {}
    for b in rest:
        g = gate(piece, piece_side, b).gate
        if g is None:
            raise InputError("piece lost gatedness")  # unreachable given rep_p
        gates[b] = g

    n = len(host)
    k = len(rest)
    new_rows = []
    for i, row in enumerate(host.dist):
        u = host.points[i]
        ext = []
        for b in rest:
            g = gates[b]
            ext.append(piece.d(b, g) + host.d(to_stage[g], u))
        new_rows.append(tuple(row) + tuple(ext))
    for bi, b in enumerate(rest):
        gb = gates[b]
        head = []
        for i in range(n):
            u = host.points[i]
            head.append(piece.d(b, gb) + host.d(to_stage[gb], u))
        tail = [piece.d(b, b2) for b2 in rest]
        new_rows.append(tuple(head) + tuple(tail))
        _ = bi
    points = list(host.points) + fresh_names
    space = FiniteMetricSpace(points, new_rows, validate=False)

    if verify != "off":
        if verify == "full":
            ok, wit = is_delta_hyperbolic(space, stage.delta)
        else:
            defect, wit = max_defect_touching(space, fresh_names)
            ok = defect <= 2 * stage.delta
        if not ok:
            raise VerificationError("glue broke delta-hyperbolicity", witness=wit)
        chain = is_delta_closed(space, host.points, stage.delta)
        if not chain.verdict:
            raise VerificationError("previous stage not delta-closed after glue",
                                    witness=chain.witness)
        copy_labels = [to_stage[b] for b in piece_side] + fresh_names
        copy_rep = is_delta_closed(space, copy_labels, stage.delta)
        if not copy_rep.verdict:
            raise VerificationError("glued copy not delta-closed",
                                    witness=copy_rep.witness)

    step = StageStep(piece=piece, piece_hash=space_hash(piece), shared=shared,
                     fresh=fresh, origin=origin)
    copy = tuple([to_stage[b] for b in piece_side] + fresh_names)
    return Stage(space=space, delta=stage.delta, index=stage.index + 1,
                 step_log=stage.step_log + (step,), params=stage.params,
                 seed=stage.seed, copies=stage.copies + (copy,), counter=counter)


def find_closed_embeddings(piece: FiniteMetricSpace, stage: Stage,
                           count: int = 1,
                           extending: Optional[dict[Label, Label]] = None,
                           limit: int = _EMBED_LIMIT) -> list[PartialIsometry]:
    """Up to ``count`` distance-preserving maps of the piece into the stage
    with delta-closed image, in deterministic search order."""
    host = stage.space
    scale = host.scale()
    rows = host.int_rows()
    n = len(host)
    m = len(piece)
    target = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            v = piece.di(i, j) * scale
            if v.denominator != 1:
                return []  # distance not on the stage grid
            target[i][j] = int(v)
    order = list(range(m))
    pre: dict[int, int] = {}
    if extending:
        for a, b in extending.items():
            pre[piece.index(a)] = host.index(b)
        order.sort(key=lambda i: (i not in pre, i))
    found: list[PartialIsometry] = []
    assigned: dict[int, int] = {}
    work = 0

    def backtrack(pos: int) -> bool:
        nonlocal work
        if pos == m:
            image = [host.points[t] for t in assigned.values()]
            if is_delta_closed(host, image, stage.delta).verdict:
                found.append(PartialIsometry.from_dict(
                    {piece.points[i]: host.points[t] for i, t in assigned.items()}))
                if len(found) >= count:
                    return True
            return False
        i = order[pos]
        if i in pre:
            cands = [pre[i]]
        else:
            cands = list(range(n))
            if host.has(piece.points[i]):
                # prefer the same-label point so identity maps are found first
                same = host.index(piece.points[i])
                cands.remove(same)
                cands.insert(0, same)
        for t in cands:
            work += 1
            if work > limit:
                raise ResourceLimitError("embedding search limit exceeded",
                                         partial=found)
            if t in assigned.values():
                continue
            ok = True
            for j, tj in assigned.items():
                if rows[t][tj] != target[i][j]:
                    ok = False
                    break
            if ok:
                assigned[i] = t
                if backtrack(pos + 1):
                    return True
                del assigned[i]
        return False

    backtrack(0)
    return found


def find_closed_embedding(piece: FiniteMetricSpace, stage: Stage,
                          extending: Optional[dict[Label, Label]] = None
                          ) -> Optional[PartialIsometry]:
    res = find_closed_embeddings(piece, stage, count=1, extending=extending)
    return res[0] if res else None


def embedding_obstruction(piece: FiniteMetricSpace, stage: Stage) -> Optional[str]:
    """A quick human-readable reason why no embedding can exist, if one is
    obvious (absence at a finite stage is otherwise not a refutation)."""
    if len(piece) > len(stage.space):
        return "piece larger than stage"
    host_max = max((v for row in stage.space.dist for v in row), default=Fraction(0))
    piece_max = max((v for row in piece.dist for v in row), default=Fraction(0))
    if piece_max > host_max:
        return "out of bounds: piece diameter exceeds stage diameter"
    return None


def _closed_subsets_of_piece(piece: FiniteMetricSpace, delta: Fraction
                             ) -> list[tuple[Label, ...]]:
    subs = [s for s in delta_closed_subsets(piece, delta) if len(s) < len(piece)]
    subs.sort(key=lambda s: (-len(s), s))
    return subs


def build_stage(params: EnumerationParams, steps: int, seed: int,
                verify: str = "incremental",
                keep_history: bool = False) -> Stage | tuple[Stage, list[Stage]]:
    """Run ``steps`` scheduled demands from a singleton stage.

    Construction is deterministic given (params, steps, seed); the log of
    performed glues replays to the same space bit-exactly.
    """
    if steps < 0:
        raise InputError("steps must be nonnegative")
    catalog = enumerate_spaces(params)
    rng = random.Random(seed)
    stage = seed_stage(Fraction(params.delta), params=params, seed=seed)
    history = [stage]
    piece_subsets: dict[int, list[tuple[Label, ...]]] = {}

    for step_idx in range(steps):
        ci = step_idx % len(catalog.spaces)
        occ = step_idx // len(catalog.spaces)
        piece = catalog.spaces[ci]
        if ci not in piece_subsets:
            piece_subsets[ci] = _closed_subsets_of_piece(piece, stage.delta)
        if occ == 0:
            if find_closed_embedding(piece, stage) is not None:
                continue  # demand already satisfied, nothing to glue
            glued = False
            for sub in piece_subsets[ci]:
                part = piece.restrict(sub)
                emb = find_closed_embedding(part, stage)
                if emb is not None:
                    mapping = emb.as_dict()
                    shared = tuple((mapping[b], b) for b in sub)
                    stage = _glue(stage, piece, shared, "demand", verify)
                    glued = True
                    break
            if not glued:
                anchor = rng.choice(stage.space.points)
                first_singleton = piece_subsets[ci][-1]  # singletons sort last
                stage = _glue(stage, piece, ((anchor, first_singleton[0]),),
                              "demand", verify)
        else:
            subs = piece_subsets[ci]
            if not subs:
                continue  # single-point piece: nothing to enrich over
            sub = subs[occ % len(subs)]
            part = piece.restrict(sub)
            embs = find_closed_embeddings(part, stage, count=8)
            if not embs:
                anchor = rng.choice(stage.space.points)
                stage = _glue(stage, piece, ((anchor, sub[0]),), "demand", verify)
            else:
                emb = embs[rng.randrange(len(embs))]
                mapping = emb.as_dict()
                if find_closed_embedding(piece, stage, extending=mapping) is None:
                    shared = tuple((mapping[b], b) for b in sub)
                    stage = _glue(stage, piece, shared, "demand", verify)
                else:
                    continue  # this (piece, subset, embedding) demand is satisfied
        if keep_history:
            history.append(stage)
    if keep_history:
        return stage, history
    return stage


def replay_step_log(delta: Fraction, step_log: Sequence[StageStep],
                    verify: str = "off") -> Stage:
    """Re-apply glue records; bit-exact reconstruction of the final space."""
    stage = seed_stage(Fraction(delta))
    for step in step_log:
        rebuilt = _glue(stage, step.piece, step.shared, step.origin, verify)
        got = rebuilt.step_log[-1]
        if got.fresh != step.fresh or got.piece_hash != step.piece_hash:
            raise VerificationError("replay diverged from the recorded step")
        stage = rebuilt
    return stage


@dataclass
class IsometryExtension:
    stage: Stage
    map: PartialIsometry
    moved: int
    added_points: tuple[Label, ...]
    glue_steps: int


def _closure_near(stage: Stage, labels: set[Label]) -> tuple[Label, ...]:
    """Closure of a small set, computed inside one glued copy when possible.

    A glued copy is delta-closed in every later stage, and closures relative
    to a delta-closed subspace agree with ambient closures, so the local
    computation is exact.
    """
    for copy in stage.copies:
        if labels <= set(copy):
            local = stage.space.restrict(copy)
            cl = closure(local, labels, stage.delta)
            return tuple(sorted(cl, key=stage.space.index))
    return closure(stage.space, labels, stage.delta)


def _pick_extension_point(stage: Stage, dom: tuple[Label, ...]) -> Label:
    """Deterministic choice of the next point to move into the domain:
    prefer points of the domain's own copies (their closures stay local)."""
    dom_set = set(dom)
    for d in dom:
        for x in stage.home_copy(d):
            if x not in dom_set:
                return x
    for x in stage.space.points:
        if x not in dom_set:
            return x
    raise InputError("domain already covers the whole stage")


def extend_isometry(stage: Stage, iso: PartialIsometry, budget: int,
                    verify: str = "incremental") -> IsometryExtension:
    """Extend a partial isometry between distinguished subsets.

    One round: pick a point x outside the domain, take the closure of
    dom + x, realize an isometric delta-closed copy of it over the codomain
    (inside the stage when one exists, otherwise by gluing the pattern over
    the codomain), and map closure points to the realized copy.  Repeats
    until at least ``budget`` additional points of the original stage moved
    into the domain.
    """
    mapping = dict(iso.pairs)
    if not iso.is_valid(stage.space, stage.space):
        raise InputError("map is not a partial isometry of the stage")
    for side, labels in (("domain", list(mapping)), ("codomain", list(mapping.values()))):
        rep = is_delta_closed(stage.space, labels, stage.delta)
        if not rep.verdict:
            raise InputError(f"{side} is not delta-closed (distinguished): {rep.witness}")

    original_points = set(stage.space.points)
    moved = 0
    glue_steps = 0
    added: list[Label] = []
    while moved < budget:
        dom = tuple(sorted(mapping, key=stage.space.index))
        if original_points <= set(dom):
            break
        x = _pick_extension_point(stage, dom)
        cl_labels = _closure_near(stage, set(dom) | {x})
        pattern = stage.space.restrict(cl_labels)
        fixed = {d: mapping[d] for d in dom if d in cl_labels}
        emb = find_closed_embedding(pattern, stage, extending=fixed)
        if emb is not None:
            new_map = emb.as_dict()
        else:
            # relabel the pattern's domain part with codomain labels and glue
            ren = {d: f"@{mapping[d]}" for d in dom if d in cl_labels}
            piece = pattern.relabel(ren)
            shared = tuple((mapping[d], f"@{mapping[d]}") for d in dom if d in cl_labels)
            stage = _glue(stage, piece, shared, "extension", verify)
            glue_steps += 1
            step = stage.step_log[-1]
            fresh = dict(step.fresh)
            new_map = {}
            for c in cl_labels:
                if c in dom:
                    new_map[c] = mapping[c]
                else:
                    new_map[c] = fresh[c]
                    added.append(fresh[c])
        gained = [c for c in cl_labels if c not in mapping and c in original_points]
        mapping.update(new_map)
        moved += len(gained)
        if not gained:
            break  # domain can no longer grow inside the original stage
    ext = PartialIsometry.from_dict(mapping)
    if not ext.is_valid(stage.space, stage.space):
        raise VerificationError("extended map failed distance preservation")
    return IsometryExtension(stage=stage, map=ext, moved=moved,
                             added_points=tuple(added), glue_steps=glue_steps)
