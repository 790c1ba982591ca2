import json
import os
from fractions import Fraction

import pytest

from errors import DegreeError, InputError, ParseError, ValidationError
from formats import (REPORT_SCHEMA, algebra_from_dict, algebra_to_dict, build_report, parse_algebra,
                     parse_structure, render_report, structure_from_text, write_report)
from lie_calculus import product_derivation


@pytest.fixture
def s2_path(samples_dir):
    return os.path.join(samples_dir, "s2.json")


def test_sample_algebras_match_models(samples_dir, sphere, cubic):
    for name, model in (("s2.json", sphere), ("truncated_x3.json", cubic)):
        algebra = parse_algebra(os.path.join(samples_dir, name))
        assert algebra.basis.degrees == model.basis.degrees
        assert algebra.basis.unit_index == 0
        assert algebra.product.table == model.product.table
        assert algebra.pairing.matrix == model.pairing.matrix
        assert algebra.pairing.degree == model.pairing.degree


def test_algebra_document_round_trip(s2_path):
    algebra = parse_algebra(s2_path)
    again = algebra_from_dict(algebra_to_dict(algebra))
    assert again.name == "H*(S^2)"
    assert again.product.table == algebra.product.table


def test_json_syntax_error_has_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "schema": "cinf-lift-algebra/1",\n  "basis": [\n')
    with pytest.raises(ParseError) as excinfo:
        parse_algebra(path)
    assert excinfo.value.line == 4
    assert excinfo.value.code == "syntax"
    assert str(path) in excinfo.value.message


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        parse_algebra(tmp_path / "absent.json")


def test_floats_are_rejected(s2_path):
    with open(s2_path, encoding="utf-8") as f:
        data = json.load(f)
    data["pairing"]["entries"][0]["value"] = 0.5
    with pytest.raises(ParseError, match="p/q"):
        algebra_from_dict(data)


def test_schema_and_names_are_checked(s2_path):
    with open(s2_path, encoding="utf-8") as f:
        data = json.load(f)
    with pytest.raises(ParseError, match="schema"):
        algebra_from_dict(dict(data, schema="other/1"))
    data["product"].append({"left": "y", "right": "1", "result": {"y": "1"}})
    with pytest.raises(ParseError, match="unknown basis element 'y'"):
        algebra_from_dict(data)


def test_invalid_algebra_fails_validation(s2_path):
    with open(s2_path, encoding="utf-8") as f:
        data = json.load(f)
    data["product"] = [p for p in data["product"] if p["left"] != "x"]
    with pytest.raises(ValidationError) as excinfo:
        algebra_from_dict(data)
    assert excinfo.value.code == "validation"
    assert algebra_from_dict(data, validate=False).basis.rank == 2


def test_empty_structure_is_product(sphere):
    structure = structure_from_text("# nothing here\n\n", sphere)
    assert structure.level == 3
    assert structure.m == product_derivation(sphere, structure.alphabet)


def test_sample_structure_file(samples_dir, sphere):
    structure = parse_structure(os.path.join(samples_dir, "s2_product.cinf"), sphere, truncation=5)
    assert structure.level == 3
    assert structure.alphabet.truncation == 5
    assert structure.m == product_derivation(sphere, structure.alphabet)


def test_higher_part_is_parsed(sphere):
    text = 'm4 tau = "2/3" * [tau, [tau, [tau, t_x]]]\n'
    structure = structure_from_text(text, sphere, validate=False)
    assert structure.level == 5
    part = structure.part(4)
    assert part.orders() == [4]
    assert part.image(0).coefficient((0, 0, 0, 1)) == Fraction(2, 3)


def test_unexpected_character_position(sphere):
    with pytest.raises(ParseError) as excinfo:
        structure_from_text("# comment\nm3 tau = [tau $ t_x]\n", sphere, path="bad.cinf")
    assert (excinfo.value.line, excinfo.value.column) == (2, 15)
    assert excinfo.value.message.startswith("bad.cinf:2:15:")


def test_unknown_generator(sphere):
    with pytest.raises(ParseError, match="unknown generator 't_y'"):
        structure_from_text("m4 tau = [tau, [tau, [tau, t_y]]]", sphere)


def test_order_mismatch_is_degree_error(sphere):
    with pytest.raises(DegreeError) as excinfo:
        structure_from_text("m3 t_x = [tau, t_x]", sphere)
    assert excinfo.value.code == "degree"
    assert excinfo.value.column == 10


def test_internal_degree_mismatch(sphere):
    with pytest.raises(DegreeError, match="expected 2"):
        structure_from_text("m3 tau = [tau, [tau, tau]]", sphere)


def test_part_below_order_two(sphere):
    with pytest.raises(DegreeError):
        structure_from_text("m1 tau = tau", sphere)


def test_wrong_product_line(sphere):
    with pytest.raises(ValidationError, match="m2 does not match"):
        structure_from_text("m2 tau = [tau, tau]", sphere)


def test_reports_are_deterministic(tmp_path):
    report = build_report("cohomology", "pass", 0, {"b": Fraction(1, 2), "a": (1, 2), "c": None})
    text = render_report(report)
    assert text == render_report(build_report("cohomology", "pass", 0,
                                              {"a": [1, 2], "c": None, "b": Fraction(1, 2)}))
    assert text.endswith("\n")
    data = json.loads(text)
    assert data == {"schema": REPORT_SCHEMA, "command": "cohomology", "status": "pass", "exit_code": 0,
                    "results": {"a": [1, 2], "b": "1/2", "c": None}}
    path = tmp_path / "report.json"
    write_report(report, path, indent=4)
    assert json.loads(path.read_text(encoding="utf-8")) == data
