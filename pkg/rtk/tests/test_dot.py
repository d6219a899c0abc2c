from rtk.engine.locality import enumerate_complete
from rtk.engine.samples import letter_space
from rtk.engine.spec_core import make_spec
from rtk.engine.theory import make_theory, quotient
from rtk.io.dot import covering_pairs, export_dot, lattice_dot, quotient_dot


def test_two_classes_give_one_edge():
    space = letter_space(2)
    result = quotient(make_theory(space, []), [make_spec(space, ["a"])])
    assert quotient_dot(result) == (
        "digraph rtk {\n"
        "  rankdir=BT;\n"
        '  n0 [label="{a}"];\n'
        '  n1 [label="{a b}"];\n'
        "  n0 -> n1;\n"
        "}\n"
    )


def test_single_class_has_no_edges():
    space = letter_space(3)
    dot = quotient_dot(quotient(make_theory(space, [])))
    assert dot.count("[label=") == 1
    assert "->" not in dot


def test_chains_are_transitively_reduced():
    order = {(i, j) for i in range(3) for j in range(3) if i <= j}
    assert covering_pairs(3, order) == [(0, 1), (1, 2)]


def test_labels_are_escaped():
    dot = export_dot(['say "hi"', "back\\slash"], {(0, 0), (1, 1)})
    assert r'n0 [label="say \"hi\""];' in dot
    assert r'n1 [label="back\\slash"];' in dot


def test_seeded_two_bit_lattice_is_a_diamond(two_bit):
    lattice = enumerate_complete(two_bit.theory, seeds=[two_bit.a, two_bit.b])
    dot = lattice_dot(lattice)
    assert dot.count("[label=") == 4
    assert dot.count("->") == 4
    assert "n0 -> n3" not in dot
    assert '[label="256 maps"]' in dot
