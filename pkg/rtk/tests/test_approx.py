import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtk.engine import approx
from rtk.engine.approx import ApproximationStructure, ApproxIndex
from rtk.engine.embed import Lumping, insertion_from_lumping
from rtk.engine.samples import bit_space, random_approx_instance
from rtk.engine.spec_core import SpecMap, apply, make_spec
from rtk.engine.theory import make_theory, reaches
from rtk.exceptions import BadApproxIndex, NoChainsDeclared, UnknownIndex

SPACE = bit_space(2)


@pytest.fixture
def balls():
    return approx.distance_structure(SPACE, approx.hamming, range(3), "hamming")


@pytest.fixture
def first_bit():
    return insertion_from_lumping(Lumping(SpecMap(SPACE, SPACE, (3, 3, 12, 12), "keep1")))


def constant(label):
    return SpecMap(SPACE, SPACE, (1 << SPACE.index(label),) * SPACE.size, f"const{label}")


def test_hamming_balls(balls):
    assert balls.index.elements == ("0", "1", "2")
    assert balls.index.zero_element == "0"
    assert approx.approximate(balls, make_spec(SPACE, ["00"]), "1") == make_spec(SPACE, ["00", "01", "10"])
    assert approx.approximate(balls, make_spec(SPACE, ["00"]), "2").is_full()
    report = approx.verify_structure(balls)
    assert report
    assert report.details == {"attainable": True, "levels": 3}


def test_unknown_level(balls):
    with pytest.raises(UnknownIndex):
        approx.approximate(balls, SPACE.full(), "7")


def test_triangle_inequality(balls):
    report = approx.check_triangle(balls, seed=5)
    assert report
    assert report.details == {"seed": 5, "corollary_samples": 200}


def test_triangle_needs_a_chain(balls):
    bare = ApproxIndex.from_covers(["0", "1", "2"], [("0", "1"), ("1", "2")], "2")
    with pytest.raises(NoChainsDeclared):
        approx.check_triangle(ApproximationStructure(bare, balls.family))


def test_too_small_sums_break_the_triangle(balls):
    index = ApproxIndex.from_covers(
        ["0", "1", "2"],
        [("0", "1"), ("1", "2")],
        "2",
        chains=[("d", ["0", "1", "2"], [("1", "1", "1")])],
    )
    report = approx.check_triangle(ApproximationStructure(index, balls.family))
    assert not report
    assert "chain d" in report.first_failure


def test_missing_sums_clamp_to_the_top(balls):
    chain = balls.index.chains[0]
    assert balls.index.add(chain, "1", "1") == "2"
    index = ApproxIndex.from_covers(["0", "1"], [("0", "1")], "1", chains=[("c", ["0", "1"], [])])
    assert index.add(index.chains[0], "0", "0") == "1"


@pytest.mark.parametrize(
    "covers, max_element, chains",
    [
        ([("0", "3")], "1", []),
        ([("0", "1"), ("1", "0")], "1", []),
        ([], "1", []),
        ([("0", "1")], "1", [("c", ["0", "5"], [])]),
        ([("0", "1")], "1", [("c", ["0", "1"], [("0", "1", "0"), ("1", "0", "1")])]),
    ],
)
def test_bad_indices(covers, max_element, chains):
    with pytest.raises(BadApproxIndex):
        ApproxIndex.from_covers(["0", "1"], covers, max_element, chains=chains)


def test_every_level_needs_a_map(balls):
    family = dict(balls.family)
    del family["1"]
    with pytest.raises(UnknownIndex):
        ApproximationStructure(balls.index, family)


def test_broken_structures_are_reported(balls):
    family = dict(balls.family, **{"1": constant("00")})
    report = approx.verify_structure(ApproximationStructure(balls.index, family))
    assert not report
    assert report.first_failure.startswith("·^1 is not inflating")


def test_approximation_space(balls):
    neighbourhoods = approx.approximation_space(balls)
    assert len(neighbourhoods) == 9
    assert neighbourhoods[-1].is_full()


def test_robustness(balls):
    single = make_spec(SPACE, ["00"])
    identity = make_theory(SPACE, [])
    leaky = make_theory(SPACE, [constant("00")])
    assert approx.is_robust(identity, balls, single, "1")
    assert not approx.is_robust(identity, balls, single, "2")
    assert not approx.is_robust(leaky, balls, single, "0")


def test_stability(balls):
    assert approx.is_stable(make_theory(SPACE, [constant("11")]), balls)
    # exchanging 01 and 11 is not an isometry
    jump = SpecMap.from_images(SPACE, SPACE, {"00": "00", "01": "11", "10": "10", "11": "01"}, "jump")
    assert not approx.is_stable(make_theory(SPACE, [jump]), balls)


def test_robustness_implication(balls):
    flip = SpecMap.from_images(SPACE, SPACE, {"00": "10", "01": "11", "10": "00", "11": "01"}, "flip1")
    theory = make_theory(SPACE, [flip])
    v, w = make_spec(SPACE, ["00"]), make_spec(SPACE, ["10"])
    assert reaches(theory, v, w)
    report = approx.check_robustness_implication(theory, balls, v, w, "1")
    assert report
    assert report.details["premise"]


@pytest.mark.parametrize(
    "generators, expected",
    [
        ([], 8),
        ([SpecMap.from_images(SPACE, SPACE, {"00": "10", "01": "11", "10": "00", "11": "01"}, "flip1")], 16),
        ([constant("00")], 4),
    ],
)
def test_robustness_transfers_between_singletons(balls, generators, expected):
    report = approx.check_robustness_transfer(make_theory(SPACE, generators), balls)
    assert report
    assert report.details == {"stable": True, "non_vacuous": expected}


def test_robustness_transfer_needs_stability(balls):
    jump = SpecMap.from_images(SPACE, SPACE, {"00": "00", "01": "11", "10": "10", "11": "01"}, "jump")
    report = approx.check_robustness_transfer(make_theory(SPACE, [jump]), balls)
    assert report.details == {"stable": False, "non_vacuous": 0}


def test_combined_knowledge_approximations(balls):
    v, w = make_spec(SPACE, ["00", "01"]), make_spec(SPACE, ["01", "11"])
    assert approx.check_intersection_approximations(balls, v, w)
    disjoint = approx.check_intersection_approximations(balls, v, make_spec(SPACE, ["11"]))
    assert disjoint.details["compatible"] is False


def test_reduction_through_the_first_bit(balls, first_bit):
    reduced = approx.reduce_structure(balls, first_bit)
    assert reduced.space.labels == ("00+01", "10+11")
    assert reduced.family["0"].table == (1, 2)
    assert reduced.family["1"].table == (3, 3)
    assert approx.collapsed_levels(balls, reduced) == [("1", "2")]
    assert approx.verify_structure(reduced).details["attainable"]
    assert approx.preserves_structure(balls, first_bit)
    report = approx.check_reduced_triangle(balls, first_bit)
    assert report
    assert report.details["applicable"]


def test_reduced_robustness(balls, first_bit):
    leaky = make_theory(SPACE, [constant("00")])
    report = approx.check_reduced_robustness(leaky, balls, first_bit, make_spec(SPACE, ["00"]), "0")
    assert report
    assert report.details["robust"] is False


@given(st.integers(min_value=0, max_value=2**32))
def test_random_structures(seed):
    rng = random.Random(seed)
    instance = random_approx_instance(rng)
    s, theory = instance.structure, instance.theory
    assert approx.verify_structure(s)
    assert approx.check_triangle(s, seed=seed, samples=20)
    assert approx.is_stable(theory, s)
    space = s.space
    v = space.singleton(rng.randrange(space.size))
    w = apply(rng.choice(theory.elements), v)
    eps = rng.choice(s.index.elements)
    assert approx.check_robustness_implication(theory, s, v, w, eps)
    assert approx.check_robustness_transfer(theory, s)
