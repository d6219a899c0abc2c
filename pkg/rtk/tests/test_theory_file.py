from fractions import Fraction

import pytest

from rtk.engine.approx import verify_structure
from rtk.exceptions import CapExceeded, DuplicateName, ParseError, RtkError, UnknownReference
from rtk.io.theory_file import parse_theory, render_theory

SHIPPED = ["animals", "four", "twobit", "convex"]

MINIMAL = """\
# two states
[states] a b

[map f] a->b b->{a b}   # trailing comment
[map g]
a->a
b->a

[monoid M]
generators = f g
cap = 50
"""


def test_minimal_theory():
    model = parse_theory(MINIMAL)
    assert model.states.labels == ("a", "b")
    assert model.map("f").table == (2, 3)
    assert model.map("g").describe() == "a->a b->a"
    assert model.monoids["M"].cap == 50
    theory = model.theory("M")
    assert theory.name == "M"
    assert model.theory("M") is theory
    assert model.spec("b a").labels == ("a", "b")


def test_maps_between_spaces():
    model = parse_theory("[states] a b c\n[space pair] L R\n[map e from pair to states] L->{a b} R->c\n")
    e = model.map("e")
    assert e.source.labels == ("L", "R")
    assert e.table == (3, 4)


def test_approximation_sections():
    text = (
        "[states] a b\n"
        "[map id] a->a b->b\n"
        "[map all] a->{a b} b->{a b}\n"
        "[approx E]\n"
        "levels = lo hi\n"
        "covers = lo<hi\n"
        "max = hi\n"
        "zero = lo\n"
        "eps lo = id\n"
        "eps hi = all\n"
        "chain c = lo hi\n"
        "sum c = lo+lo=lo lo+hi=hi\n"
    )
    s = parse_theory(text).structure("E")
    assert verify_structure(s).details["attainable"]
    chain = s.index.chains[0]
    assert s.index.add(chain, "hi", "lo") == "hi"
    assert s.family["hi"].name == "E^hi"


def test_points_and_affine_sections():
    model = parse_theory("[states] x\n[points p]\n0 1/2\n1 0\n[affine g]\nrow = 1 0\nrow = 0 1\n")
    assert [x.coords for x in model.point_spec("p")] == [(0, Fraction(1, 2)), (1, 0)]
    assert model.affine_map("g").offset == (0, 0)


@pytest.mark.parametrize(
    "text, error, line, col",
    [
        ("a b\n[states] a\n", ParseError, 1, 1),
        ("[space s] a\n", ParseError, 1, 1),
        ("[states] a b\n[thing x]\n", ParseError, 2, 2),
        ("[states] a a\n", ParseError, 1, 12),
        ("[states] a b\n[map f] a->x b->b\n", ParseError, 2, 12),
        ("[states] a b\n[map f] a->{} b->b\n", ParseError, 2, 12),
        ("[states] a b\n[map f] a->a a->b b->b\n", ParseError, 2, 14),
        ("[states] a b\n[map f] a->a junk b->b\n", ParseError, 2, 14),
        ("[states] a b\n[map f] a->a\n", ParseError, 2, 1),
        ("[states] a b\n[map f] a->a b->b\n[map f] a->b b->a\n", DuplicateName, 3, 1),
        ("[states] a b\n[monoid M]\ngenerators = g\n", UnknownReference, 3, 1),
        ("[states] a b\n[monoid M]\ncolour = red\n", ParseError, 3, 1),
        ("[states] a b\n[map s] a->b b->a\n[lumping L]\nmap = s\n", ParseError, 3, 1),
        ("[states] a b\n[map f] a->a b->b\n[approx E]\nlevels = 0\n", ParseError, 3, 1),
        ("[states] a\n[map f] a->a\n[approx E]\nlevels = 0\nmax = 0\neps 0 = f\nsum c = 0+0=0\n", UnknownReference, 3, 1),
        ("[states] x\n[points p]\n0\n0 1\n", ParseError, 2, 1),
        ("[states] x\n[points p]\n1/0\n", ParseError, 3, 1),
    ],
)
def test_errors_carry_positions(text, error, line, col):
    with pytest.raises(error) as excinfo:
        parse_theory(text)
    assert (excinfo.value.line, excinfo.value.col) == (line, col)
    assert str(excinfo.value).startswith(f"line {line}, column {col}: ")


def test_unknown_sections_are_reported_on_lookup(theory_file):
    model = theory_file("four")
    with pytest.raises(RtkError, match="no monoid section named 'Nope'"):
        model.theory("Nope")


@pytest.mark.parametrize("name", SHIPPED)
def test_rendering_round_trips(theory_file, name):
    model = theory_file(name)
    text = render_theory(model)
    again = parse_theory(text)
    assert render_theory(again) == text
    assert {k: f.table for k, f in again.maps.items()} == {k: f.table for k, f in model.maps.items()}


def test_shipped_theories(theory_file):
    animals = theory_file("animals")
    assert animals.lumping("spots").is_partition()
    assert len(animals.theory("F").monoid) == 2

    four = theory_file("four")
    assert len(four.theory("Full").monoid) == 256
    with pytest.raises(CapExceeded):
        four.theory("Small")
    assert four.lumping("merged").map.table == (3, 3, 4, 8)

    twobit = theory_file("twobit")
    assert verify_structure(twobit.structure("hamming"))
    assert twobit.lumping("keep1").map.table == (3, 3, 12, 12)
    assert len(twobit.theory("A").monoid) == 4

    convex = theory_file("convex")
    assert len(convex.point_spec("triangle")) == 4
    assert str(convex.affine_map("shrink")) == "shrink"
