import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtk.engine import embed
from rtk.engine.embed import Kind, Lumping
from rtk.engine.samples import letter_space, random_embedding, random_partition_lumping
from rtk.engine.spec_core import SpecMap, StateSpace, compose, make_spec
from rtk.engine.theory import make_theory
from rtk.exceptions import (
    EmptyIntersection,
    IncompatibleSideResource,
    LumpingOrderViolated,
    NotEndomorphism,
    NotIntensive,
    NotLumping,
    NotOrderEmbedding,
    NotPartitionLumping,
    NotSubmonoid,
    OverlappingImages,
)

PAIR = StateSpace(("L", "R"))


@pytest.fixture
def blur(omega4):
    return Lumping(SpecMap.from_images(omega4, omega4, {"a": ["a", "b"], "b": ["a", "b"], "c": "c", "d": "d"}, "blur"))


def test_verify_lumping_reports_the_failing_law(omega4):
    assert embed.verify_lumping(SpecMap.identity(omega4))
    shift = SpecMap(omega4, omega4, (2, 4, 8, 1))
    report = embed.verify_lumping(shift)
    assert not report
    assert report.first_failure == "not inflating at a"
    growing = SpecMap(omega4, omega4, (3, 6, 4, 8))
    assert "not idempotent" in embed.verify_lumping(growing).first_failure
    with pytest.raises(NotEndomorphism):
        embed.verify_lumping(SpecMap(PAIR, omega4, (1, 2)))


def test_lumping_constructor_validates(omega4):
    with pytest.raises(NotLumping):
        Lumping(SpecMap(omega4, omega4, (2, 4, 8, 1)))


def test_blur_insertion(omega4, blur):
    insertion = embed.insertion_from_lumping(blur)
    assert insertion.small.labels == ("ab", "c", "d")
    assert insertion.reduce(make_spec(omega4, ["b"])) == make_spec(insertion.small, ["ab"])
    assert insertion.embed(make_spec(insertion.small, ["ab"])) == make_spec(omega4, ["a", "b"])
    report = embed.verify_insertion(insertion)
    assert report
    assert report.details["adjunction"] == "exhaustive"
    assert embed.lumping_from_insertion(insertion).map.table == blur.map.table


def test_multi_character_labels_are_joined_with_plus():
    space = StateSpace(("00", "01", "10", "11"))
    lumping = Lumping(SpecMap(space, space, (3, 3, 12, 12), "forget2"))
    assert embed.insertion_from_lumping(lumping).small.labels == ("00+01", "10+11")


def test_overlapping_lumping_has_no_insertion():
    space = letter_space(3)
    # a and c both see b, but their classes differ
    overlapping = Lumping(SpecMap(space, space, (3, 2, 6)))
    assert not overlapping.is_partition()
    with pytest.raises(NotPartitionLumping):
        embed.insertion_from_lumping(overlapping)


def test_sampled_adjunction_above_the_limit(settings):
    settings.RTK_EXHAUSTIVE_STATES = 2
    space = letter_space(6)
    lumping = Lumping(SpecMap(space, space, (3, 3, 12, 12, 48, 48)))
    report = embed.verify_insertion(embed.insertion_from_lumping(lumping), seed=3, samples=50)
    assert report
    assert report.details == {"adjunction": "sampled", "pairs": 50, "seed": 3}


def test_order_embedding_criterion(omega4):
    covered = SpecMap(PAIR, omega4, (0b0011, 0b0111))
    assert not embed.verify_order_embedding(covered)
    with pytest.raises(NotOrderEmbedding):
        embed.classify_embedding(covered)


def test_classification(omega4):
    sharp = SpecMap.from_images(PAIR, omega4, {"L": "a", "R": "c"}, "sharp")
    coarse = SpecMap.from_images(PAIR, omega4, {"L": ["a", "b"], "R": ["c", "d"]}, "coarse")
    partial = SpecMap.from_images(PAIR, omega4, {"L": ["a", "b"], "R": "c"}, "partial")
    assert embed.classify_embedding(sharp).kind is Kind.EXTENSIVE
    intensive = embed.classify_embedding(coarse)
    assert intensive.kind is Kind.INTENSIVE
    assert intensive.adjoint.table == (1, 1, 2, 2)
    assert embed.classify_embedding(partial).kind is Kind.GENERAL
    assert embed.is_extensive(sharp) and embed.is_intensive(coarse)
    with pytest.raises(NotIntensive):
        embed.classify_embedding(partial).insertion


def test_a_bijection_counts_as_extensive():
    space = letter_space(2)
    swap = SpecMap(space, space, (2, 1))
    assert embed.classify_embedding(swap).kind is Kind.EXTENSIVE


def test_decomposition_of_a_general_embedding(omega4):
    partial = SpecMap.from_images(PAIR, omega4, {"L": ["a", "b"], "R": "c"}, "partial")
    parts = embed.decompose_embedding(partial)
    assert parts.gamma.labels == ("a", "b", "c")
    assert parts.composite().table == partial.table
    assert embed.classify_embedding(parts.intensive).kind is Kind.INTENSIVE
    assert embed.classify_embedding(parts.extensive).kind is Kind.EXTENSIVE

    swapped = embed.decompose_embedding(partial, "int-ext")
    assert swapped.gamma.labels == ("L", "R", "d")
    assert swapped.composite().table == partial.table
    assert swapped.first is swapped.extensive


def test_decomposition_needs_disjoint_images(omega4):
    overlapping = SpecMap(PAIR, omega4, (0b0011, 0b0110))
    with pytest.raises(OverlappingImages):
        embed.decompose_embedding(overlapping)
    with pytest.raises(ValueError):
        embed.decompose_embedding(SpecMap(PAIR, omega4, (1, 2)), "sideways")


def test_nesting(omega4):
    mid = StateSpace(("p", "q", "r"))
    to_mid = SpecMap.from_images(PAIR, mid, {"L": ["p", "q"], "R": "r"}, "to_mid")
    fine = SpecMap.from_images(mid, omega4, {"p": "a", "q": "b", "r": ["c", "d"]}, "fine")
    coarse = SpecMap.from_images(PAIR, omega4, {"L": ["a", "b"], "R": ["c", "d"]}, "coarse")

    nested = embed.nest(to_mid, fine)
    assert nested.e.table == coarse.table
    assert embed.verify_insertion(nested)

    middle = embed.nest(fine, coarse, "middle")
    assert (middle.small, middle.big) == (PAIR, mid)
    assert middle.e.table == to_mid.table

    with pytest.raises(LumpingOrderViolated):
        embed.nest(coarse, fine, "middle")


def test_locality(omega4, blur):
    assert embed.is_local(blur, make_spec(omega4, ["a", "b", "d"]))
    assert not embed.is_local(blur, make_spec(omega4, ["a"]))


@pytest.fixture
def swap_theory(omega4):
    swap = SpecMap.from_images(omega4, omega4, {"a": "b", "b": "a", "c": "c", "d": "d"}, "swap_ab")
    const_c = SpecMap(omega4, omega4, (4, 4, 4, 4), "const_c")
    return make_theory(omega4, [swap, const_c]), [swap]


def test_restricted_agent(swap_theory, blur):
    theory, agent = swap_theory
    insertion = embed.insertion_from_lumping(blur)
    restricted = embed.restrict_theory(theory, agent, insertion)
    assert restricted.space.labels == ("ab", "c", "d")
    assert len(restricted.monoid) == 1


def test_restricted_agent_must_belong_to_the_theory(omega4, blur):
    theory = make_theory(omega4, [])
    with pytest.raises(NotSubmonoid):
        embed.restrict_theory(theory, [SpecMap(omega4, omega4, (4, 4, 4, 4))], embed.insertion_from_lumping(blur))


def test_effective_theory(swap_theory, blur, omega4):
    theory, agent = swap_theory
    insertion = embed.insertion_from_lumping(blur)
    effective = embed.effective_theory(theory, agent, insertion, make_spec(omega4, ["a", "c", "d"]))
    # e(ab) ∩ K = {a}, which the swap sends to {b}, still inside the class ab
    assert len(effective.monoid) == 1
    with pytest.raises(IncompatibleSideResource):
        embed.effective_theory(theory, agent, insertion, make_spec(omega4, ["a", "c"]))


def test_effective_theory_needs_every_class_to_meet_k(omega4):
    theory = make_theory(omega4, [])
    small = StateSpace(("ab", "c", "d"))
    # not an insertion: e(ab) = {a} although h sends b to ab
    lopsided = embed.GaloisInsertion(
        small, omega4, SpecMap(small, omega4, (1, 4, 8)), SpecMap(omega4, small, (1, 1, 2, 4))
    )
    with pytest.raises(EmptyIntersection) as excinfo:
        embed.effective_theory(theory, [], lopsided, make_spec(omega4, ["b", "c", "d"]))
    assert excinfo.value.witness == "ab"

    insertion = embed.insertion_from_lumping(Lumping(SpecMap(omega4, omega4, (3, 3, 12, 12))))
    effective = embed.effective_theory(theory, [], insertion, make_spec(omega4, ["a", "c"]))
    assert effective.space.labels == ("ab", "cd")
    assert len(effective.monoid) == 1


def test_lumping_from_maps_identifies_equal_images(omega4):
    merge = SpecMap.from_images(omega4, omega4, {"a": "a", "b": "a", "c": "d", "d": "d"})
    lumping, iterations = embed.lumping_from_maps([merge])
    assert lumping.map.table == (3, 3, 12, 12)
    assert iterations == 0
    identity, _ = embed.lumping_from_maps([], space=omega4)
    assert identity.map.table == SpecMap.identity(omega4).table


@given(st.integers(min_value=0, max_value=2**32))
def test_lumpings_induce_insertions(seed):
    rng = random.Random(seed)
    space = letter_space(rng.randint(1, 5))
    lumping = random_partition_lumping(rng, space, "L")
    insertion = embed.insertion_from_lumping(lumping)
    assert embed.verify_insertion(insertion, seed=seed)
    assert compose(insertion.e, insertion.h).table == lumping.map.table
    v, w = space.full(), space.singleton(rng.randrange(space.size))
    assert embed.check_lumping_laws(lumping, v, w)


@given(st.integers(min_value=0, max_value=2**32))
def test_decomposition_theorem(seed):
    e = random_embedding(random.Random(seed))
    for order in ("ext-int", "int-ext"):
        parts = embed.decompose_embedding(e, order)
        assert parts.composite().table == e.table
        assert embed.classify_embedding(parts.extensive).kind is Kind.EXTENSIVE
