"""Seeded property suites over generated instances.

Each suite returns a CheckReport and stops collecting after the first few
failures; the test-suite and the ``laws`` command both run them.
"""

import itertools
import logging
import random
from fractions import Fraction

from django.conf import settings

from rtk.engine import approx, convex, embed, locality, oracle
from rtk.engine.reports import CheckReport
from rtk.engine.samples import (
    random_affine,
    random_approx_instance,
    random_distribution,
    random_embedding,
    random_insertion_pair,
    random_partition_lumping,
    random_point,
    random_point_spec,
    random_probability,
    random_spec,
    random_theory,
    letter_space,
    two_bit_system,
)
from rtk.engine.spec_core import StateSpace, Specification, apply, combine, compose, make_spec
from rtk.engine.theory import reaches
from rtk.exceptions import Incompatible, InternalInconsistency

logger = logging.getLogger(__name__)

MAX_FAILURES = 5
MIN_INSTANCES = 10


def _rng(seed):
    return random.Random(settings.RTK_DEFAULT_SEED if seed is None else seed)


def _specs(rng, space, limit=12):
    if space.full_mask <= limit:
        return [Specification(space, mask) for mask in space.masks()]
    return [random_spec(rng, space) for _ in range(limit)]


def _scaled(count, scale):
    return max(MIN_INSTANCES, count // scale)


def _full(report):
    return len(report.failures) >= MAX_FAILURES


def animal_example():
    report = CheckReport("combining knowledge")
    space = StateSpace(("cheetah", "jaguar", "leopard", "lynx", "puma"))
    first = make_spec(space, ["cheetah", "leopard"])
    second = make_spec(space, ["jaguar", "leopard"])
    report.require(combine(first, second) == make_spec(space, ["leopard"]), "combination is not {leopard}")
    try:
        combine(combine(first, second), make_spec(space, ["puma", "lynx"]))
        report.fail("contradicting knowledge was combined")
    except Incompatible:
        pass
    return report


def preorder_laws(count=500, seed=None, use_oracle=True):
    rng = _rng(seed)
    report = CheckReport("reachability preorder", details={"theories": count, "oracle": use_oracle})
    for n in range(count):
        theory = random_theory(rng)
        specs = _specs(rng, theory.space, limit=8)
        reach = {(v, w): reaches(theory, v, w).found for v in specs for w in specs}
        if use_oracle:
            for v, w in reach:
                if reach[v, w] != oracle.oracle_reaches(theory, v, w).found:
                    report.fail(f"theory {n}: oracle disagrees on {v} → {w}")
        for v in specs:
            report.require(reach[v, v], f"theory {n}: {v} does not reach itself")
        for u, v, w in itertools.product(specs, repeat=3):
            if reach[u, v] and reach[v, w] and not reach[u, w]:
                report.fail(f"theory {n}: transitivity fails at {u}, {v}, {w}")
            if reach[u, w] and u.mask & v.mask:
                joint = combine(u, v)
                if not reaches(theory, joint, w).found:
                    report.fail(f"theory {n}: {joint} does not reach {w}")
        if _full(report):
            break
    return report


def lumping_laws(count=200, seed=None):
    rng = _rng(seed)
    report = CheckReport("lumpings are insertions", details={"lumpings": count})
    for n in range(count):
        space = letter_space(rng.randint(1, 5))
        lumping = random_partition_lumping(rng, space, "L")
        insertion = embed.insertion_from_lumping(lumping)
        checked = embed.verify_insertion(insertion, seed=n)
        report.require(checked.details["adjunction"] == "exhaustive", f"lumping {n} was only sampled")
        report.absorb(checked, f"lumping {n}")
        report.require(
            compose(insertion.e, insertion.h).table == lumping.map.table, f"lumping {n}: Λ ≠ e∘h"
        )
        v, w = random_spec(rng, space), random_spec(rng, space)
        report.absorb(embed.check_lumping_laws(lumping, v, w), f"lumping {n}")
        if _full(report):
            break
    return report


def _factor_kinds_ok(factor, expected):
    kind = embed.classify_embedding(factor).kind
    if kind is expected:
        return True
    # a bijection is both
    bijection = (
        factor.is_deterministic()
        and factor.source.size == factor.target.size
        and bool(embed.verify_order_embedding(factor))
    )
    return expected is embed.Kind.INTENSIVE and kind is embed.Kind.EXTENSIVE and bijection


def decomposition_laws(count=100, seed=None):
    rng = _rng(seed)
    report = CheckReport("embedding decomposition", details={"embeddings": count})
    for n in range(count):
        e = random_embedding(rng)
        for order in ("ext-int", "int-ext"):
            parts = embed.decompose_embedding(e, order)
            report.require(parts.composite().table == e.table, f"embedding {n}: e ≠ ext∘int ({order})")
            report.require(
                embed.classify_embedding(parts.extensive).kind is embed.Kind.EXTENSIVE,
                f"embedding {n}: extensive factor misclassified ({order})",
            )
            report.require(
                _factor_kinds_ok(parts.intensive, embed.Kind.INTENSIVE),
                f"embedding {n}: intensive factor misclassified ({order})",
            )
        if _full(report):
            break
    return report


def compatibility_laws(count=200, seed=None):
    rng = _rng(seed)
    report = CheckReport("free composition of local resources", details={"pairs": count})
    verdicts = {True: 0, False: 0}
    for n in range(count):
        first, second = random_insertion_pair(rng)
        try:
            verdicts[locality.check_compatibility(first, second).passed] += 1
        except InternalInconsistency as exc:
            report.fail(f"pair {n}: {exc}")
        if _full(report):
            break
    report.details.update(compatible=verdicts[True], incompatible=verdicts[False])
    return report


def locality_suite(system=None):
    """Commutants, lattice, agents and copies on all maps of two bits."""
    system = system or two_bit_system()
    theory, a, b = system.theory, system.a, system.b
    report = CheckReport("two-bit locality")
    report.require(locality.commutant(theory, a) == b, "commutant(A) ≠ B")
    report.require(locality.bicommutant(theory, a) == a, "bicommutant(A) ≠ A")
    report.require(locality.join(a, b) == locality.whole(theory), "A ∨ B ≠ T")
    report.require(locality.is_centreless(theory), "T has a nontrivial centre")

    agents = locality.derive_agents(theory, a, b)
    for label, reduced in (("A", agents.theory_a), ("B", agents.theory_b)):
        report.require(
            len(reduced.monoid) == 4 and reduced.space.size == 2,
            f"agent {label} does not act as all one-bit maps",
        )
    report.absorb(agents.certificate)
    report.absorb(locality.certify_agents_theorem(agents))

    lattice = locality.enumerate_complete(theory, seeds=[a.elements, b.elements])
    report.absorb(locality.check_lattice_laws(lattice))
    report.details["lattice_nodes"] = len(lattice.nodes)

    swap = locality.verify_swap(theory, a, b, system.iso, system.exchange, system.exchange)
    report.absorb(swap)
    report.require(swap.details.get("pairs") == 16, "swap was not checked on 16 pairs")
    supports = [
        locality.SwapPair.trivial(theory, a),
        locality.SwapPair.build(theory, a, b, system.iso, system.exchange, system.exchange),
    ]
    space = theory.space
    bit_one_zero = make_spec(space, ["00", "01"])
    report.require(
        locality.n_copies(bit_one_zero, supports) == make_spec(space, ["00"]), "two copies are not {00}"
    )
    report.require(locality.n_copies(bit_one_zero, [], space).is_full(), "zero copies are not Ω")
    return report


def approx_suite(count=200, seed=None):
    rng = _rng(seed)
    report = CheckReport("approximations")
    non_vacuous = 0
    for n in range(count):
        instance = random_approx_instance(rng)
        theory, structure = instance.theory, instance.structure
        report.absorb(approx.verify_structure(structure), f"instance {n}")
        report.absorb(approx.check_triangle(structure, seed=n, samples=20), f"instance {n}")
        report.require(bool(approx.is_stable(theory, structure)), f"instance {n}: theory is not stable")
        levels = structure.index.elements
        v, w = random_spec(rng, theory.space), random_spec(rng, theory.space)
        eps = rng.choice(levels)
        reached = apply(rng.choice(theory.elements), v)
        implication = approx.check_robustness_implication(theory, structure, v, reached, eps)
        report.absorb(implication, f"instance {n}")
        transfer = approx.check_robustness_transfer(theory, structure)
        report.absorb(transfer, f"instance {n}")
        non_vacuous += implication.details["premise"] + transfer.details["non_vacuous"]
        report.absorb(approx.check_intersection_approximations(structure, v, w), f"instance {n}")
        lumping = random_partition_lumping(rng, theory.space, "L")
        insertion = embed.insertion_from_lumping(lumping)
        report.absorb(approx.verify_structure(approx.reduce_structure(structure, insertion)), f"instance {n}")
        report.absorb(approx.check_reduced_robustness(theory, structure, insertion, v, eps), f"instance {n}")
        report.absorb(approx.check_reduced_triangle(structure, insertion), f"instance {n}")
        if _full(report):
            break
    report.details.update(instances=count, non_vacuous=non_vacuous)
    report.require(non_vacuous > 0, "no instance met the premise of the robustness implication")
    return report


def _combining(rng):
    p, q, r = (random_probability(rng) for _ in range(3))
    nu, omega, tau = (random_point(rng, 2) for _ in range(3))
    s = r * p + (1 - r) * q
    left = convex.mix(r, convex.mix(p, nu, omega), convex.mix(q, nu, tau))
    if s == 1:
        return left == nu
    alpha = r * (1 - p) / (1 - s)
    return left == convex.mix(s, nu, convex.mix(alpha, omega, tau))


def convex_suite(count=1000, seed=None):
    rng = _rng(seed)
    report = CheckReport("convexity laws", details={"instances": count})
    for n in range(count):
        size = rng.randint(1, 5)
        dist = random_distribution(rng, size)
        points = tuple(random_point(rng, 2) for _ in range(size))
        nested = convex.nested_mixture(dist, points)
        report.require(nested == convex.weighted_sum(dist.weights, points), f"instance {n}: nested ≠ weighted sum")

        order = list(range(size))
        rng.shuffle(order)
        permuted = convex.nested_mixture(
            [dist.weights[i] for i in order], [points[i] for i in order]
        )
        report.require(permuted == nested, f"instance {n}: permuting changed the mixture")

        report.require(_combining(rng), f"instance {n}: combining mixtures fails")

        other = random_distribution(rng, size)
        r = random_probability(rng)
        blended = convex.Distribution(tuple(r * a + (1 - r) * b for a, b in zip(dist.weights, other.weights)))
        report.require(
            convex.mix(r, nested, convex.nested_mixture(other, points))
            == convex.nested_mixture(blended, points),
            f"instance {n}: mixture of distributions fails",
        )

        repeated = points + (points[-1],)
        split = random_probability(rng)
        weights = dist.weights[:-1] + (split * dist.weights[-1], (1 - split) * dist.weights[-1])
        report.require(
            convex.nested_mixture(weights, repeated) == nested, f"instance {n}: repetition collapse fails"
        )

        nu, omega = random_point(rng, 2), random_point(rng, 2)
        inner = convex.mix(split, nu, omega)
        report.require(
            convex.nested_mixture(dist, points[:-1] + (inner,))
            == convex.nested_mixture(weights, points[:-1] + (nu, omega)),
            f"instance {n}: distributivity fails",
        )
        if _full(report):
            break
    extremes = convex.extreme_points(convex.PointSpec.of(0, Fraction(1, 2), 1))
    report.require(extremes == convex.PointSpec.of(0, 1), "{0, 1/2, 1} has the wrong extreme points")
    return report


def hull_suite(count=200, seed=None, use_oracle=True):
    rng = _rng(seed)
    report = CheckReport("hulls", details={"instances": count, "oracle": use_oracle})
    for n in range(count):
        dim = rng.randint(1, 2)
        v, w = random_point_spec(rng, dim), random_point_spec(rng, dim)
        r = random_probability(rng)
        mixed = convex.mix_specs(r, v, w)
        representatives = convex.mix_specs(r, convex.extreme_points(v), convex.extreme_points(w))
        report.require(
            convex.prob_equivalent(mixed, representatives), f"instance {n}: hull of mixtures is inconsistent"
        )
        report.absorb(convex.check_hull_laws(v, w), f"instance {n}")
        queries = list(v.union(w))[:2] + [random_point(rng, dim) for _ in range(2)]
        if use_oracle:
            for x in queries:
                if convex.hull_contains(v, x) != oracle.oracle_hull_contains(v, x):
                    report.fail(f"instance {n}: hull membership of {x} disagrees with the oracle")
        g = random_affine(rng, dim, "g")
        report.absorb(convex.check_convexity_preserving(g, v, w, [r]), f"instance {n}")
        if _full(report):
            break
    return report


def all_suites(seed=None, scale=1, use_oracle=True):
    """Every suite; scale shrinks the counts for quick runs, down to MIN_INSTANCES."""
    suites = [
        animal_example(),
        preorder_laws(_scaled(500, scale), seed, use_oracle),
        lumping_laws(_scaled(200, scale), seed),
        decomposition_laws(_scaled(100, scale), seed),
        compatibility_laws(_scaled(200, scale), seed),
        locality_suite(),
        approx_suite(_scaled(200, scale), seed),
        convex_suite(_scaled(1000, scale), seed),
        hull_suite(_scaled(200, scale), seed, use_oracle),
    ]
    for report in suites:
        logger.debug(f"{report.name}: {'passed' if report else report.first_failure}")
    return suites
