"""Space file format and stage bundles.

A space file is a JSON document with fields ``delta``, ``points``, ``dist``
(row-major rational strings) and optional ``marked`` (lists of point
labels).  Serialization is canonical: rationals in lowest terms, two-space
indent, trailing newline; parse(serialize(x)) reproduces x bit-exactly.

A stage bundle is a directory with ``params.json``, ``space.json`` and
``steps.jsonl`` (one glue record per line), replayable bit-exactly.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .catalog import EnumerationParams
from .errors import InputError
from .rational import format_rational, parse_rational
from .space import FiniteMetricSpace, validate_metric
from .stage import Stage, StageStep, replay_step_log, space_hash


def space_to_obj(space: FiniteMetricSpace, delta: Fraction,
                 marked=None) -> dict:
    obj = {
        "delta": format_rational(delta),
        "points": list(space.points),
        "dist": [[format_rational(v) for v in row] for row in space.dist],
    }
    if marked is not None:
        obj["marked"] = [list(m) for m in marked]
    return obj


def space_to_text(space: FiniteMetricSpace, delta: Fraction, marked=None) -> str:
    return json.dumps(space_to_obj(space, delta, marked), indent=2,
                      ensure_ascii=False) + "\n"


def parse_space_obj(obj) -> tuple[FiniteMetricSpace, Fraction, Optional[list]]:
    if not isinstance(obj, dict):
        raise InputError("space document must be a JSON object")
    for key in ("delta", "points", "dist"):
        if key not in obj:
            raise InputError(f"space document missing field {key!r}")
    delta = parse_rational(obj["delta"])
    if delta < 0:
        raise InputError("delta must be nonnegative")
    points = obj["points"]
    if not isinstance(points, list) or not points:
        raise InputError("points must be a nonempty list")
    rows = obj["dist"]
    if not isinstance(rows, list):
        raise InputError("dist must be a matrix")
    dist = [[parse_rational(v) for v in row] for row in rows]
    bad = validate_metric([str(p) for p in points], dist)
    if bad:
        v = bad[0]
        raise InputError(f"space file violates metric axiom {v.axiom} at {v.points}")
    space = FiniteMetricSpace([str(p) for p in points], dist, validate=False)
    marked = None
    if "marked" in obj and obj["marked"] is not None:
        marked = [[str(p) for p in m] for m in obj["marked"]]
        for m in marked:
            for p in m:
                space.index(p)
    return space, delta, marked


def parse_space_text(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"space file is not valid JSON: {exc}") from None
    return parse_space_obj(obj)


def read_space_file(path) -> tuple[FiniteMetricSpace, Fraction, Optional[list]]:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {path}")
    return parse_space_text(p.read_text(encoding="utf-8"))


def write_space_file(path, space: FiniteMetricSpace, delta: Fraction, marked=None):
    Path(path).write_text(space_to_text(space, delta, marked), encoding="utf-8")


# -- stage bundles -----------------------------------------------------------

def _params_obj(stage: Stage) -> dict:
    p = stage.params
    obj = {
        "delta": format_rational(stage.delta),
        "seed": stage.seed,
        "glue_steps": stage.index,
    }
    if p is not None:
        obj["enumeration"] = {
            "delta": format_rational(p.delta),
            "max_size": p.max_size,
            "denominator_bound": p.denominator_bound,
            "diameter_bound": format_rational(p.diameter_bound),
            "graph_mode": p.graph_mode,
        }
    return obj


def _step_obj(step: StageStep) -> dict:
    return {
        "op": "glue",
        "origin": step.origin,
        "piece_hash": step.piece_hash,
        "piece": {
            "points": list(step.piece.points),
            "dist": [[format_rational(v) for v in row] for row in step.piece.dist],
        },
        "shared": [[a, b] for a, b in step.shared],
        "fresh": [[b, name] for b, name in step.fresh],
    }


def write_stage_bundle(stage: Stage, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "params.json").write_text(
        json.dumps(_params_obj(stage), indent=2) + "\n", encoding="utf-8")
    (d / "space.json").write_text(
        space_to_text(stage.space, stage.delta), encoding="utf-8")
    with open(d / "steps.jsonl", "w", encoding="utf-8") as fh:
        for step in stage.step_log:
            fh.write(json.dumps(_step_obj(step), separators=(",", ": ")) + "\n")


def read_stage_bundle(directory) -> Stage:
    """Load and replay a bundle; the replayed space must match the stored one."""
    d = Path(directory)
    for name in ("params.json", "space.json", "steps.jsonl"):
        if not (d / name).exists():
            raise InputError(f"bundle is missing {name}")
    params_obj = json.loads((d / "params.json").read_text(encoding="utf-8"))
    delta = parse_rational(params_obj["delta"])
    steps = []
    with open(d / "steps.jsonl", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            piece = FiniteMetricSpace(
                [str(p) for p in obj["piece"]["points"]],
                [[parse_rational(v) for v in row] for row in obj["piece"]["dist"]],
                validate=False)
            steps.append(StageStep(
                piece=piece, piece_hash=obj["piece_hash"],
                shared=tuple((a, b) for a, b in obj["shared"]),
                fresh=tuple((b, name) for b, name in obj["fresh"]),
                origin=obj.get("origin", "demand")))
            if steps[-1].piece_hash != space_hash(piece):
                raise InputError("bundle step hash mismatch")
    stage = replay_step_log(delta, steps, verify="off")
    stored, stored_delta, _ = read_space_file(d / "space.json")
    if stored_delta != delta or stored != stage.space:
        raise InputError("bundle space does not match its replayed step log")
    enum = params_obj.get("enumeration")
    params = None
    if enum:
        params = EnumerationParams(
            delta=parse_rational(enum["delta"]), max_size=int(enum["max_size"]),
            denominator_bound=int(enum["denominator_bound"]),
            diameter_bound=parse_rational(enum["diameter_bound"]),
            graph_mode=bool(enum["graph_mode"]))
    return Stage(space=stage.space, delta=delta, index=stage.index,
                 step_log=stage.step_log, params=params,
                 seed=params_obj.get("seed"), copies=stage.copies,
                 counter=stage.counter)
