import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtk.engine.oracle import oracle_reaches
from rtk.engine.samples import bit_maps, bit_space, letter_space
from rtk.engine.spec_core import SpecMap, make_spec
from rtk.engine.theory import (
    close_monoid,
    combine_theories,
    deterministic_maps,
    is_conserved,
    is_free,
    make_theory,
    permutation_maps,
    quotient,
    reaches,
    resource_independent_maps,
)
from rtk.exceptions import CapExceeded, NotEndomorphism, SpaceMismatch
from rtk.tests.strategies import maps, specs

small_spaces = st.integers(min_value=1, max_value=3).map(letter_space)


@pytest.fixture
def merge(omega4):
    return SpecMap.from_images(omega4, omega4, {"a": "a", "b": "a", "c": "c", "d": "d"}, "merge_ab")


@pytest.fixture
def swap(omega4):
    return SpecMap.from_images(omega4, omega4, {"a": "b", "b": "a", "c": "c", "d": "d"}, "swap_ab")


@pytest.fixture
def const_c(omega4):
    return SpecMap(omega4, omega4, (4, 4, 4, 4), "const_c")


def test_swap_closes_to_two_elements(omega4, swap):
    monoid = close_monoid(omega4, [swap])
    assert len(monoid) == 2
    assert monoid.elements[0].name == "swap_ab"
    assert monoid.identity.table == SpecMap.identity(omega4).table


def test_empty_generators_give_the_trivial_monoid(omega4):
    monoid = close_monoid(omega4, [])
    assert len(monoid) == 1


def test_cap_is_enforced(omega4):
    with pytest.raises(CapExceeded) as excinfo:
        close_monoid(omega4, deterministic_maps(omega4), cap=100)
    assert excinfo.value.cap == 100
    assert excinfo.value.count == 101


def test_cap_defaults_to_settings(omega4, settings):
    settings.RTK_MONOID_CAP = 10
    with pytest.raises(CapExceeded):
        close_monoid(omega4, permutation_maps(omega4))


def test_generators_must_be_endomorphisms(omega4):
    with pytest.raises(NotEndomorphism):
        close_monoid(omega4, [SpecMap(letter_space(2), omega4, (1, 2))])


def test_full_function_monoid_has_256_elements(omega4):
    assert len(close_monoid(omega4, deterministic_maps(omega4))) == 256


def test_merge_reaches_a_with_witness(omega4, merge):
    theory = make_theory(omega4, [merge])
    witness = reaches(theory, make_spec(omega4, ["a", "b"]), make_spec(omega4, ["a"]))
    assert witness
    assert witness.map.name == "merge_ab"


def test_identity_cannot_move(omega4):
    theory = make_theory(omega4, [])
    assert not reaches(theory, make_spec(omega4, ["a"]), make_spec(omega4, ["b"]))
    assert reaches(theory, make_spec(omega4, ["a"]), make_spec(omega4, ["a", "b"]))


def test_reaches_checks_spaces(omega4):
    theory = make_theory(omega4, [])
    with pytest.raises(SpaceMismatch):
        reaches(theory, letter_space(3).full(), omega4.full())


def test_free_resources(omega4, const_c):
    theory = make_theory(omega4, [const_c])
    assert is_free(theory, make_spec(omega4, ["c"]))
    assert is_free(theory, omega4.full())
    assert not is_free(make_theory(omega4, []), make_spec(omega4, ["a"]))


def test_quotient_groups_swapped_states(omega4, swap):
    theory = make_theory(omega4, [swap])
    a, b, c = (make_spec(omega4, [x]) for x in "abc")
    result = quotient(theory, [a, b, c])
    assert (a, b) in result.classes
    assert (c,) in result.classes
    assert result.classes[result.top] == (omega4.full(),)
    assert result.free == tuple(i == result.top for i in range(len(result.classes)))
    for i in range(len(result.classes)):
        assert result.reaches(i, result.top)


def test_quotient_all_specs_is_gated(omega4, settings):
    theory = make_theory(omega4, [])
    assert len(quotient(theory, all_specs=True).classes) == 15
    settings.RTK_EXHAUSTIVE_STATES = 3
    with pytest.raises(ValueError):
        quotient(theory, all_specs=True)


def test_conservation(omega4, swap, merge):
    ab = make_spec(omega4, ["a", "b"])
    assert is_conserved(make_theory(omega4, [swap]), ab)
    assert not is_conserved(make_theory(omega4, [merge]), ab)
    assert is_conserved(make_theory(omega4, permutation_maps(omega4)), omega4.full())


def test_resource_independent_maps(omega4, const_c):
    found = resource_independent_maps(make_theory(omega4, [const_c]))
    assert [(f.name, str(v)) for f, v in found] == [("const_c", "{c}")]
    assert resource_independent_maps(make_theory(omega4, [])) == []


def test_resource_independent_maps_of_all_functions(omega4):
    found = resource_independent_maps(make_theory(omega4, deterministic_maps(omega4)))
    assert sorted(str(v) for _, v in found) == ["{a}", "{b}", "{c}", "{d}"]


def test_combined_theory_keeps_shared_maps():
    space = bit_space(2)
    bit_one = make_theory(space, bit_maps(space, 0))
    permutations = make_theory(space, permutation_maps(space))
    shared = combine_theories(bit_one, permutations)
    assert {f.name for f in shared.elements} == {"id", "flip1"}


def test_combining_with_the_identity(omega4, swap):
    theory = make_theory(omega4, [swap])
    assert len(combine_theories(theory, make_theory(omega4, [])).monoid) == 1
    assert len(combine_theories(theory, theory).monoid) == 2


@given(
    small_spaces.flatmap(
        lambda s: st.tuples(st.lists(maps(s), max_size=2), specs(s), specs(s), specs(s))
    )
)
def test_reachability_is_a_preorder(case):
    generators, u, v, w = case
    theory = make_theory(generators[0].source if generators else u.space, generators, cap=1000)
    assert reaches(theory, u, u)
    if reaches(theory, u, v) and reaches(theory, v, w):
        assert reaches(theory, u, w)
    if v.mask & ~w.mask == 0:
        assert reaches(theory, v, w)
    if reaches(theory, u, w) and u.mask & v.mask:
        assert reaches(theory, make_spec(u.space, [x for x in u.labels if x in v.labels]), w)
    assert reaches(theory, u, v).found == oracle_reaches(theory, u, v).found
