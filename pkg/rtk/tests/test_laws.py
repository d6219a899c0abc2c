import pytest

from rtk.engine import laws
from rtk.engine.embed import Kind
from rtk.engine.samples import letter_space
from rtk.engine.spec_core import SpecMap


def test_animal_example():
    assert laws.animal_example()


@pytest.mark.parametrize(
    "suite, kwargs",
    [
        (laws.preorder_laws, {"count": 10}),
        (laws.preorder_laws, {"count": 10, "use_oracle": False}),
        (laws.lumping_laws, {"count": 10}),
        (laws.decomposition_laws, {"count": 10}),
        (laws.approx_suite, {"count": 10}),
        (laws.convex_suite, {"count": 30}),
        (laws.hull_suite, {"count": 10}),
    ],
)
def test_suites_hold(suite, kwargs):
    report = suite(seed=11, **kwargs)
    assert report, report.first_failure


def test_compatibility_verdicts_are_counted():
    report = laws.compatibility_laws(count=20, seed=4)
    assert report, report.first_failure
    assert report.details["compatible"] + report.details["incompatible"] == 20


def test_locality_suite(two_bit):
    report = laws.locality_suite(two_bit)
    assert report, report.first_failure
    assert report.details["lattice_nodes"] == 4


def test_suites_are_seeded():
    first = laws.convex_suite(count=5, seed=9)
    second = laws.convex_suite(count=5, seed=9)
    assert first.as_dict() == second.as_dict()


def test_failures_stop_the_run(monkeypatch):
    monkeypatch.setattr(laws.convex, "weighted_sum", lambda weights, points: None)
    report = laws.convex_suite(count=50, seed=1)
    assert not report
    assert len(report.failures) == laws.MAX_FAILURES


def test_all_suites_scaled():
    suites = laws.all_suites(seed=2, scale=100, use_oracle=False)
    assert len(suites) == 9
    assert all(suites), [s.first_failure for s in suites if not s]
    assert suites[1].details == {"theories": laws.MIN_INSTANCES, "oracle": False}


def test_robustness_implication_is_exercised():
    report = laws.approx_suite(count=10, seed=5)
    assert report, report.first_failure
    assert report.details["non_vacuous"] > 0


def test_only_bijections_count_as_intensive_factors():
    two, three = letter_space(2), letter_space(3)
    swap = SpecMap(two, two, (2, 1), "swap")
    assert laws._factor_kinds_ok(swap, Kind.INTENSIVE)
    injection = SpecMap(two, three, (1, 2), "into")
    assert laws._factor_kinds_ok(injection, Kind.EXTENSIVE)
    assert not laws._factor_kinds_ok(injection, Kind.INTENSIVE)
