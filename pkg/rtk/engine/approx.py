"""Approximation structures.

An approximation structure is a family of inflating endomorphisms ·^ε
indexed by a finite poset with a top element ε_max. Index labels are strings
so that structures read from theory files and structures built in code look
the same.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field

from django.conf import settings

from rtk.engine.embed import restrict_theory
from rtk.engine.reports import CheckReport
from rtk.engine.spec_core import (
    SpecMap,
    Specification,
    compose,
    iter_bits,
    same_space,
)
from rtk.engine.theory import is_free, reaches
from rtk.exceptions import (
    BadApproxIndex,
    InternalInconsistency,
    NoChainsDeclared,
    NotEndomorphism,
    UnknownIndex,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chain:
    """A totally ordered part of the index with a commutative addition.

    Sums missing from the table clamp to the top of the index.
    """

    name: str
    members: tuple
    sums: dict = field(compare=False)


@dataclass(frozen=True)
class ApproxIndex:
    elements: tuple
    order: frozenset
    max_element: str
    zero_element: str = None
    chains: tuple = ()

    @classmethod
    def from_covers(cls, elements, covers, max_element, zero_element=None, chains=()):
        """Build the index from cover pairs (a, b) meaning a < b.

        chains is an iterable of (name, members, sums) with sums a list of
        (a, b, a+b) triples.
        """
        elements = tuple(dict.fromkeys(elements))
        known = set(elements)
        for label in (max_element, zero_element):
            if label is not None and label not in known:
                raise BadApproxIndex(f"{label!r} is not an index element")
        below = {a: {a} for a in elements}
        for a, b in covers:
            if a not in known or b not in known:
                raise BadApproxIndex(f"cover {a}<{b} names an unknown element")
            below[b].add(a)
        changed = True
        while changed:
            changed = False
            for b in elements:
                reach = set().union(*(below[a] for a in below[b]))
                if reach != below[b]:
                    below[b] = reach
                    changed = True
        order = frozenset((a, b) for b in elements for a in below[b])
        for a, b in itertools.combinations(elements, 2):
            if (a, b) in order and (b, a) in order:
                raise BadApproxIndex(f"{a} and {b} are below each other")
        for a in elements:
            if (a, max_element) not in order:
                raise BadApproxIndex(f"{max_element} is not above {a}")

        index = cls(elements, order, max_element, zero_element)
        built = tuple(index._chain(*chain) for chain in chains)
        object.__setattr__(index, "chains", built)
        return index

    def _chain(self, name, members, sums):
        members = tuple(members)
        for a in members:
            if a not in self.elements:
                raise BadApproxIndex(f"chain {name} names an unknown element {a!r}")
        for a, b in itertools.combinations(members, 2):
            if not (self.leq(a, b) or self.leq(b, a)):
                raise BadApproxIndex(f"chain {name} is not totally ordered at {a}, {b}")
        table = {}
        for a, b, total in sums:
            if a not in members or b not in members:
                raise BadApproxIndex(f"sum {a}+{b} leaves chain {name}")
            if total not in members and total != self.max_element:
                raise BadApproxIndex(f"chain {name} is not closed under {a}+{b}={total}")
            for key in ((a, b), (b, a)):
                if table.get(key, total) != total:
                    raise BadApproxIndex(f"addition on chain {name} is not commutative at {a}+{b}")
                table[key] = total
        return Chain(name, members, table)

    def __contains__(self, label):
        return label in self.elements

    def leq(self, a, b):
        return (a, b) in self.order

    def add(self, chain, a, b):
        return chain.sums.get((a, b), self.max_element)


@dataclass(frozen=True)
class ApproximationStructure:
    index: ApproxIndex
    family: dict = field(compare=False)
    name: str = None

    def __post_init__(self):
        missing = set(self.index.elements) - set(self.family)
        if missing:
            raise UnknownIndex(f"no map given for level {sorted(missing)[0]}")
        extra = set(self.family) - set(self.index.elements)
        if extra:
            raise UnknownIndex(f"{sorted(extra)[0]} is not an index element")
        maps = list(self.family.values())
        for f in maps:
            if not f.is_endomorphism():
                raise NotEndomorphism(f"{f} is not an endomorphism")
            same_space(f.source, maps[0].source)

    @property
    def space(self):
        return self.family[self.index.max_element].source

    def level(self, eps):
        try:
            return self.family[eps]
        except KeyError:
            raise UnknownIndex(f"{eps!r} is not an index element") from None

    def tables(self):
        return {eps: self.family[eps].table for eps in self.index.elements}


def distance_structure(space, distance, levels, name=None):
    """Balls of integer radius under a distance on states.

    levels are the radii, the largest must saturate; they form one chain
    with saturating addition.
    """
    levels = sorted(levels)
    labels = [str(r) for r in levels]
    family = {}
    for r, label in zip(levels, labels):
        table = tuple(
            sum(1 << j for j in range(space.size) if distance(space.label(i), space.label(j)) <= r)
            for i in range(space.size)
        )
        family[label] = SpecMap(space, space, table, f"ball{label}")
    sums = []
    for (r, a), (s, b) in itertools.combinations_with_replacement(zip(levels, labels), 2):
        total = next((label for t, label in zip(levels, labels) if t >= r + s), labels[-1])
        sums.append((a, b, total))
    index = ApproxIndex.from_covers(
        labels,
        list(zip(labels, labels[1:])),
        labels[-1],
        zero_element=labels[0] if levels[0] == 0 else None,
        chains=[("d", labels, sums)],
    )
    return ApproximationStructure(index, family, name)


def hamming(x, y):
    return sum(a != b for a, b in zip(x, y))


def verify_structure(s):
    """Inflating, monotone and saturating; attainability is reported as a detail."""
    report = CheckReport("approximation structure")
    space = s.space
    tables = s.tables()
    for eps, table in tables.items():
        bad = next((i for i, image in enumerate(table) if not image >> i & 1), None)
        if bad is not None:
            report.fail(f"·^{eps} is not inflating at {space.label(bad)}")
            break
    violation = next(
        (
            (a, b, i)
            for a, b in sorted(s.index.order)
            for i in range(space.size)
            if tables[a][i] & ~tables[b][i]
        ),
        None,
    )
    if violation:
        a, b, i = violation
        report.fail(f"not monotone: {{{space.label(i)}}}^{a} ⊄ {{{space.label(i)}}}^{b}")
    top = tables[s.index.max_element]
    bad = next((i for i, image in enumerate(top) if image != space.full_mask), None)
    if bad is not None:
        report.fail(f"{s.index.max_element} does not saturate at {space.label(bad)}")
    zero = s.index.zero_element
    attainable = zero is not None and tables[zero] == SpecMap.identity(space).table
    report.details.update(attainable=attainable, levels=len(tables))
    return report


def approximate(s, v, eps):
    f = s.level(eps)
    same_space(f.source, v.space)
    return f(v)


def _triangle_witness(s, chain, tables):
    space = s.space
    for a, b in itertools.product(chain.members, repeat=2):
        total = tables[s.index.add(chain, a, b)]
        for i in range(space.size):
            twice = s.family[b].image_mask(tables[a][i])
            if twice & ~total[i]:
                return a, b, i
    return None


def check_triangle(s, seed=None, samples=200):
    """(W^ε)^ε′ ⊆ W^{ε+ε′} on every declared chain, plus the sampled corollary
    V ⊆ W^ε ∧ Ṽ ⊆ V^ε′ ⇒ Ṽ ⊆ W^{ε+ε′}."""
    if not s.index.chains:
        raise NoChainsDeclared(f"{s.name or 'structure'} declares no chains with addition")
    seed = settings.RTK_DEFAULT_SEED if seed is None else seed
    space = s.space
    tables = s.tables()
    report = CheckReport("triangle inequality", details={"seed": seed})
    for chain in s.index.chains:
        witness = _triangle_witness(s, chain, tables)
        if witness:
            a, b, i = witness
            report.fail(
                f"chain {chain.name}: ({{{space.label(i)}}}^{a})^{b} ⊄ "
                f"{{{space.label(i)}}}^{s.index.add(chain, a, b)}"
            )
    if not report:
        return report

    rng = random.Random(seed)
    for _ in range(samples):
        chain = rng.choice(s.index.chains)
        a, b = rng.choice(chain.members), rng.choice(chain.members)
        w = rng.randint(1, space.full_mask)
        v = _random_submask(rng, s.family[a].image_mask(w))
        tilde = _random_submask(rng, s.family[b].image_mask(v))
        bound = s.family[s.index.add(chain, a, b)].image_mask(w)
        if tilde & ~bound:
            report.fail(f"corollary fails on chain {chain.name} at {a}, {b}")
            break
    report.details["corollary_samples"] = samples
    return report


def _random_submask(rng, mask):
    members = list(iter_bits(mask))
    chosen = rng.sample(members, rng.randint(1, len(members)))
    return sum(1 << i for i in chosen)


def approximation_space(s):
    """Neighbourhoods {ω}^ε of single states, in a stable order."""
    space = s.space
    masks = {s.family[eps].table[i] for eps in s.index.elements for i in range(space.size)}
    return [Specification(space, mask) for mask in sorted(masks, key=lambda m: (bin(m).count("1"), m))]


def is_stable(theory, s):
    """f(V^ε) ⊆ f(V)^ε for every element f, level ε and state."""
    same_space(theory.space, s.space)
    report = CheckReport("stability")
    space = s.space
    for f in theory.monoid.elements:
        for eps in s.index.elements:
            ball = s.family[eps]
            for i in range(space.size):
                left = f.image_mask(ball.table[i])
                right = ball.image_mask(f.table[i])
                if left & ~right:
                    report.fail(f"{f}({{{space.label(i)}}}^{eps}) ⊄ {f}({{{space.label(i)}}})^{eps}")
                    return report
    return report


def is_robust(theory, s, v, eps):
    """V is ε-robust iff its ε-approximation is not free."""
    same_space(theory.space, v.space)
    return not is_free(theory, approximate(s, v, eps))


def check_intersection_approximations(s, v, w):
    """(V ∩ W)^ε ⊆ V^ε ∩ W^ε for compatible V, W."""
    report = CheckReport("approximating combined knowledge")
    joint = v.mask & w.mask
    if not joint:
        report.details["compatible"] = False
        return report
    for eps in s.index.elements:
        f = s.family[eps].image_mask
        report.require(f(joint) & ~(f(v.mask) & f(w.mask)) == 0, f"fails at level {eps}")
    return report


def check_robustness_implication(theory, s, v, w, eps):
    """stable ∧ V → W ∧ W ε-robust ⇒ V ε-robust."""
    report = CheckReport("robustness implication")
    premise = bool(is_stable(theory, s)) and reaches(theory, v, w).found and is_robust(theory, s, w, eps)
    report.details["premise"] = premise
    if premise:
        report.require(is_robust(theory, s, v, eps), f"{v} is not {eps}-robust although {w} is")
    return report


def check_robustness_transfer(theory, s):
    """The robustness implication for every pair of singletons {ω} → {ω'} and every level.

    details["non_vacuous"] counts the cases whose premise held.
    """
    report = CheckReport("robustness transfer")
    stable = bool(is_stable(theory, s))
    report.details.update(stable=stable, non_vacuous=0)
    if not stable:
        return report
    space = s.space
    robust = {}

    def robust_at(i, eps):
        if (i, eps) not in robust:
            robust[i, eps] = is_robust(theory, s, space.singleton(i), eps)
        return robust[i, eps]

    for i, j in itertools.product(range(space.size), repeat=2):
        if not reaches(theory, space.singleton(i), space.singleton(j)).found:
            continue
        for eps in s.index.elements:
            if robust_at(j, eps):
                report.details["non_vacuous"] += 1
                report.require(
                    robust_at(i, eps),
                    f"{{{space.label(i)}}} is not {eps}-robust although {{{space.label(j)}}} is",
                )
    return report


def reduce_structure(s, insertion):
    """·^ε on the small space as h∘·^ε∘e."""
    same_space(insertion.big, s.space)
    family = {
        eps: compose(insertion.h, compose(f, insertion.e)).named(f"~{f.name}" if f.name else None)
        for eps, f in s.family.items()
    }
    reduced = ApproximationStructure(s.index, family, f"~{s.name}" if s.name else None)
    original_report, reduced_report = verify_structure(s), verify_structure(reduced)
    if original_report and not reduced_report:
        raise InternalInconsistency(f"reduced structure fails: {reduced_report.first_failure}")
    if original_report.details["attainable"] and not reduced_report.details["attainable"]:
        raise InternalInconsistency("attainability was lost in the reduction")
    collapsed = collapsed_levels(s, reduced)
    if collapsed:
        logger.debug(f"levels collapsed by the reduction: {collapsed}")
    return reduced


def collapsed_levels(original, reduced):
    """Pairs of levels equal after reduction but distinct before."""
    pairs = []
    for a, b in itertools.combinations(original.index.elements, 2):
        if original.family[a].table != original.family[b].table and (
            reduced.family[a].table == reduced.family[b].table
        ):
            pairs.append((a, b))
    return pairs


def preserves_structure(s, insertion):
    """h∘·^ε∘Λ = h∘·^ε for every level."""
    same_space(insertion.big, s.space)
    lump = insertion.lumping_map
    return all(
        compose(insertion.h, compose(f, lump)).table == compose(insertion.h, f).table
        for f in s.family.values()
    )


def check_reduced_triangle(s, insertion):
    """A structure-preserving insertion carries the triangle inequality over."""
    report = CheckReport("reduced triangle inequality")
    applicable = preserves_structure(s, insertion) and bool(check_triangle(s))
    report.details["applicable"] = applicable
    if applicable:
        report.absorb(check_triangle(reduce_structure(s, insertion)))
    return report


def check_reduced_robustness(theory, s, insertion, v, eps, restricted=None, reduced=None):
    """Not ε-robust upstairs ⇒ h(V) not ε-robust in the restricted theory."""
    restricted = restricted or restrict_theory(theory, theory.monoid.elements, insertion)
    reduced = reduced or reduce_structure(s, insertion)
    report = CheckReport("reduced robustness")
    upstairs = is_robust(theory, s, v, eps)
    report.details["robust"] = upstairs
    if not upstairs:
        h_v = insertion.h(v)
        report.require(
            not is_robust(restricted, reduced, h_v, eps),
            f"{h_v} is {eps}-robust downstairs although {v} is not",
        )
    return report
