from fractions import Fraction

import pytest

from hypspace.catalog import EnumerationParams
from hypspace.errors import InputError
from hypspace.io import (parse_space_text, read_space_file, read_stage_bundle,
                         space_to_text, write_space_file, write_stage_bundle)
from hypspace.rational import format_rational, parse_rational
from hypspace.stage import build_stage

from conftest import cycle4, line_space


def test_rational_forms():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational("-7/14") == Fraction(-1, 2)
    assert parse_rational("0") == 0
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(7)) == "7"
    for bad in ("", "1/0", "x", "1.5", "1/2/3"):
        with pytest.raises(InputError):
            parse_rational(bad)


def test_round_trip_bit_exact():
    c4 = cycle4()
    text = space_to_text(c4, Fraction(1), marked=[["v0"], ["v0", "v1"]])
    space, delta, marked = parse_space_text(text)
    assert space == c4 and delta == 1 and marked == [["v0"], ["v0", "v1"]]
    assert space_to_text(space, delta, marked) == text


def test_round_trip_fractional():
    line = line_space([0, Fraction(1, 2), Fraction(7, 3)])
    text = space_to_text(line, Fraction(1, 6))
    space, delta, marked = parse_space_text(text)
    assert space == line and delta == Fraction(1, 6) and marked is None
    assert space_to_text(space, delta) == text


def test_parse_rejects_bad_documents():
    with pytest.raises(InputError):
        parse_space_text("not json")
    with pytest.raises(InputError):
        parse_space_text('{"points": ["a"], "dist": [["0"]]}')  # no delta
    with pytest.raises(InputError):
        parse_space_text('{"delta": "1", "points": ["a", "b"], '
                         '"dist": [["0", "1"], ["2", "0"]]}')  # asymmetric
    with pytest.raises(InputError):
        parse_space_text('{"delta": "1", "points": ["a"], "dist": [["0"]], '
                         '"marked": [["zz"]]}')  # unknown marked label


def test_space_file_io(tmp_path):
    c4 = cycle4()
    path = tmp_path / "c4.json"
    write_space_file(path, c4, Fraction(1))
    space, delta, _ = read_space_file(path)
    assert space == c4 and delta == 1
    with pytest.raises(InputError):
        read_space_file(tmp_path / "missing.json")


def test_stage_bundle_round_trip(tmp_path):
    params = EnumerationParams(delta=Fraction(1), max_size=2,
                               denominator_bound=1, diameter_bound=Fraction(2))
    stage = build_stage(params, steps=5, seed=4)
    write_stage_bundle(stage, tmp_path / "bundle")
    loaded = read_stage_bundle(tmp_path / "bundle")
    assert loaded.space == stage.space
    assert loaded.delta == stage.delta
    assert loaded.index == stage.index
    assert loaded.copies == stage.copies


def test_stage_bundle_bit_exact_across_runs(tmp_path):
    params = EnumerationParams(delta=Fraction(1), max_size=2,
                               denominator_bound=1, diameter_bound=Fraction(2))
    for i, out in enumerate(("one", "two")):
        stage = build_stage(params, steps=6, seed=21)
        write_stage_bundle(stage, tmp_path / out)
    for name in ("params.json", "space.json", "steps.jsonl"):
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "two" / name).read_bytes()
        assert a == b


def test_bundle_detects_tampering(tmp_path):
    params = EnumerationParams(delta=Fraction(1), max_size=2,
                               denominator_bound=1, diameter_bound=Fraction(2))
    stage = build_stage(params, steps=3, seed=8)
    write_stage_bundle(stage, tmp_path / "b")
    space_file = tmp_path / "b" / "space.json"
    text = space_file.read_text().replace('"1"', '"2"', 1)
    space_file.write_text(text)
    with pytest.raises(InputError):
        read_stage_bundle(tmp_path / "b")
