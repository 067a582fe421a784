import pytest

from src.errors import (
    InputError,
    MalformedPermutationError,
    NotAHomomorphismError,
    PreconditionError,
    SpecSyntaxError,
)
from src.spec_format import load_spec, parse_spec, parse_word, render_spec
from tests.helpers import FIXTURES

C3_IN_A5 = """
GROUP C3
  PERM 3
  GEN g = (1 2 3)
END
GROUP A5
  PERM 5
  GEN (1 2 3 4 5)
  GEN (1 2 3)
END
HOM phi FROM C3 TO A5
  MAP g -> {image}
END
"""


def test_parse_word():
    assert parse_word("a^2 b a^-1", ["a", "b"]) == (1, 1, 2, -1)
    assert parse_word("1", ["a"]) == ()
    with pytest.raises(SpecSyntaxError):
        parse_word("c", ["a", "b"])


@pytest.mark.parametrize("name, groups, homs", [
    ("a5.grp", {"C3": 3, "A5": 60}, ["phi"]),
    ("s3.grp", {"S3": 6, "One": 1, "Z2": 2}, ["trivial", "sign"]),
    ("q8.grp", {"Q8": 8, "V4": 4}, ["quotient"]),
    ("a3_s3.grp", {"A3": 3, "S3": 6}, ["inclusion"]),
    ("z2_z4.grp", {"Z2": 2, "Z4": 4, "V": 4}, ["double", "diagonal"]),
])
def test_fixtures_load(name, groups, homs):
    doc = load_spec(FIXTURES / name)
    assert {k: g.group.order for k, g in doc.groups.items()} == groups
    assert list(doc.homs) == homs


def test_unnamed_generators_are_numbered():
    doc = load_spec(FIXTURES / "a5.grp")
    assert doc.groups["A5"].generator_names == ["g1", "g2"]
    assert doc.groups["C3"].generator_names == ["g"]


def test_product_generators_are_qualified():
    doc = load_spec(FIXTURES / "z2_z4.grp")
    assert doc.groups["V"].generator_names == ["Z2.x", "Z2.x"]
    assert doc.homs["diagonal"].is_injective


def test_presentation_group():
    doc = load_spec(FIXTURES / "z2_z4.grp")
    Z4 = doc.groups["Z4"]
    a = Z4.generator("a")
    assert Z4.group.element_orders[a] == 4
    assert doc.homs["double"].image_of.tolist() == [0, Z4.group.power(a, 2)]


def test_hom_selection():
    doc = load_spec(FIXTURES / "s3.grp")
    with pytest.raises(PreconditionError):
        doc.hom()
    with pytest.raises(PreconditionError):
        doc.hom("missing")
    assert doc.hom("sign").is_surjective


def test_round_trip():
    doc = load_spec(FIXTURES / "z2_z4.grp")
    again = parse_spec(render_spec(doc))
    assert render_spec(again) == render_spec(doc)
    assert {k: g.group.order for k, g in again.groups.items()} == {"Z2": 2, "Z4": 4, "V": 4}


def test_transposition_is_not_in_a5():
    with pytest.raises(PreconditionError) as info:
        parse_spec(C3_IN_A5.format(image="(1 2)"))
    assert info.value.witness["line"] == 11
    assert info.value.exit_code == 3


def test_image_must_define_a_homomorphism():
    text = C3_IN_A5.replace("A5", "S5").replace("GEN (1 2 3)\n", "GEN (1 2)\n")
    with pytest.raises(NotAHomomorphismError):
        parse_spec(text.format(image="(1 2)"))


@pytest.mark.parametrize("text, line", [
    ("GROUP G\n  PERM 3\n  GEN (1 2\nEND\n", 1),
    ("GROUP G\n  PERM 3\n", 1),
    ("HOM f FROM A TO B\nEND\n", 1),
    ("GROUP G\n  CAYLEY 2\n  ROW 0 1\nEND\n", 1),
    ("GROUP G\n  PERM 3\n  REL a\nEND\n", 3),
    ("WHAT\n", 1),
    ("GROUP G\n  PERM 2\n  GEN (1 2)\nEND\nGROUP G\n  PERM 2\nEND\n", 5),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(InputError) as info:
        parse_spec(text)
    assert info.value.witness.get("line", getattr(info.value, "line", None)) == line


def test_malformed_permutation():
    with pytest.raises(MalformedPermutationError):
        parse_spec("GROUP G\n  PERM 3\n  GEN (1 4)\nEND\n")


def test_unreadable_file(tmp_path):
    with pytest.raises(InputError):
        load_spec(tmp_path / "absent.grp")


def test_images_in_catalog_product():
    doc = parse_spec(
        "GROUP Z2\n  NAMED Z2\nEND\n"
        "GROUP E\n  NAMED Z2^3\nEND\n"
        "HOM diag FROM Z2 TO E\n  MAP g1 -> (1 2)|()|(1 2)\nEND\n"
    )
    phi = doc.hom("diag")
    assert phi.is_injective
    E = doc.groups["E"].group
    assert E.format_element(phi(doc.groups["Z2"].generator("g1"))) == "(1 2)|()|(1 2)"
