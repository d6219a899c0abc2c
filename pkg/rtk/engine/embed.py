"""Lumpings, Galois insertions and specification embeddings."""

import enum
import logging
import random
from dataclasses import dataclass

from django.conf import settings

from rtk.engine.reports import CheckReport
from rtk.engine.spec_core import (
    SpecMap,
    StateSpace,
    compose,
    compose_tables,
    iter_bits,
    popcount,
    same_space,
)
from rtk.engine.theory import ResourceTheory, close_monoid
from rtk.exceptions import (
    EmptyIntersection,
    IncompatibleSideResource,
    InternalInconsistency,
    LumpingOrderViolated,
    NotEndomorphism,
    NotIntensive,
    NotLumping,
    NotOrderEmbedding,
    NotPartitionLumping,
    NotSubmonoid,
    OverlappingImages,
)

logger = logging.getLogger(__name__)


def verify_lumping(f):
    if not f.is_endomorphism():
        raise NotEndomorphism(f"{f} is not an endomorphism")
    report = CheckReport("lumping")
    space = f.source
    for i, image in enumerate(f.table):
        if not image >> i & 1:
            report.fail(f"not inflating at {space.label(i)}")
            break
    squared = compose_tables(f.table, f.table)
    for i, (once, twice) in enumerate(zip(f.table, squared)):
        if once != twice:
            report.fail(f"not idempotent at {space.label(i)}")
            break
    return report


@dataclass(frozen=True)
class Lumping:
    """An idempotent inflating endomorphism."""

    map: SpecMap

    def __post_init__(self):
        report = verify_lumping(self.map)
        if not report:
            raise NotLumping(f"{self.map}: {report.first_failure}")

    @property
    def space(self):
        return self.map.source

    @property
    def name(self):
        return self.map.name

    def classes(self):
        """Distinct singleton images, ordered by their first state."""
        return tuple(dict.fromkeys(self.map.table))

    def is_partition(self):
        table = self.map.table
        return all(table[j] == image for image in table for j in iter_bits(image))


def identity_lumping(space):
    return Lumping(SpecMap.identity(space))


@dataclass(frozen=True)
class GaloisInsertion:
    small: StateSpace
    big: StateSpace
    e: SpecMap
    h: SpecMap
    name: str = None

    def __post_init__(self):
        same_space(self.e.source, self.small)
        same_space(self.e.target, self.big)
        same_space(self.h.source, self.big)
        same_space(self.h.target, self.small)

    @property
    def lumping_map(self):
        return compose(self.e, self.h)

    def embed(self, v):
        return self.e(v)

    def reduce(self, v):
        return self.h(v)


def identity_insertion(space):
    identity = SpecMap.identity(space)
    return GaloisInsertion(space, space, identity, identity, "id")


def reduced_labels(space, classes):
    """Canonical labels for the classes of a lumping."""
    labels = []
    for mask in classes:
        members = [space.label(i) for i in iter_bits(mask)]
        if len(members) == 1:
            label = members[0]
        elif all(len(member) == 1 for member in members):
            label = "".join(members)
        else:
            label = "+".join(members)
        while label in labels:
            label += "'"
        labels.append(label)
    return labels


def insertion_from_lumping(lumping):
    if not lumping.is_partition():
        raise NotPartitionLumping(
            f"{lumping.name or 'lumping'} has overlapping classes and induces no reduced space"
        )
    big = lumping.space
    classes = lumping.classes()
    small = StateSpace(reduced_labels(big, classes))
    class_of = {image: k for k, image in enumerate(classes)}
    e = SpecMap(small, big, classes, f"e[{lumping.name}]" if lumping.name else None)
    h = SpecMap(
        big,
        small,
        tuple(1 << class_of[image] for image in lumping.map.table),
        f"h[{lumping.name}]" if lumping.name else None,
    )
    logger.debug(f"reduced {big.size} states to {small.size} classes")
    return GaloisInsertion(small, big, e, h, lumping.name)


def lumping_from_insertion(insertion):
    return Lumping(insertion.lumping_map.named(insertion.name))


def verify_order_embedding(e):
    """e is an order embedding iff no singleton image is covered by the others."""
    report = CheckReport("order embedding")
    table = e.table
    for i, image in enumerate(table):
        others = 0
        for j, other in enumerate(table):
            if j != i:
                others |= other
        if image & ~others == 0:
            report.fail(
                f"e({{{e.source.label(i)}}}) is covered by the images of the other states"
            )
            break
    return report


def _adjunction_pairs(insertion, seed, samples):
    small, big = insertion.small, insertion.big
    limit = settings.RTK_EXHAUSTIVE_STATES
    if small.size <= limit and big.size <= 2 * limit:
        return "exhaustive", ((v, z) for v in small.masks() for z in big.masks())
    rng = random.Random(seed)
    pairs = [
        (rng.randint(1, small.full_mask), rng.randint(1, big.full_mask))
        for _ in range(samples)
    ]
    return "sampled", pairs


def verify_insertion(insertion, seed=None, samples=None):
    """Check h∘e = id, the adjunction Z ⊆ e(V) ⇔ h(Z) ⊆ V, and that e is an order embedding."""
    seed = settings.RTK_DEFAULT_SEED if seed is None else seed
    samples = settings.RTK_ADJUNCTION_SAMPLES if samples is None else samples
    e, h = insertion.e, insertion.h
    small = insertion.small
    report = CheckReport("galois insertion")

    round_trip = compose_tables(h.table, e.table)
    for i, image in enumerate(round_trip):
        if image != 1 << i:
            report.fail(f"h(e({{{small.label(i)}}})) is not {{{small.label(i)}}}")
            break

    for j, image in enumerate(h.table):
        if popcount(image) != 1:
            report.fail(f"h({{{insertion.big.label(j)}}}) is not a single state")
            break

    report.absorb(verify_order_embedding(e))

    mode, pairs = _adjunction_pairs(insertion, seed, samples)
    checked = 0
    for v, z in pairs:
        checked += 1
        below_embedding = z & ~e.image_mask(v) == 0
        reduced_below = h.image_mask(z) & ~v == 0
        if below_embedding != reduced_below:
            report.fail(f"adjunction fails for V={v:#b}, Z={z:#b}")
            break
    report.details.update(adjunction=mode, pairs=checked, seed=seed)
    return report


class Kind(str, enum.Enum):
    EXTENSIVE = "extensive"
    INTENSIVE = "intensive"
    GENERAL = "general"


@dataclass(frozen=True)
class Embedding:
    e: SpecMap
    kind: Kind
    adjoint: SpecMap = None

    @property
    def insertion(self):
        if self.kind is not Kind.INTENSIVE:
            raise NotIntensive(f"{self.e} is a {self.kind.value} embedding")
        return GaloisInsertion(self.e.source, self.e.target, self.e, self.adjoint, self.e.name)


def candidate_adjoint(e):
    """h({σ}) = {ω : σ ∈ e({ω})}, or None when that is not a single state for every σ."""
    preimages = [0] * e.target.size
    for i, image in enumerate(e.table):
        for j in iter_bits(image):
            preimages[j] |= 1 << i
    if any(popcount(mask) != 1 for mask in preimages):
        return None
    return SpecMap(e.target, e.source, tuple(preimages), f"adj[{e.name}]" if e.name else None)


def classify_embedding(e):
    report = verify_order_embedding(e)
    if not report:
        raise NotOrderEmbedding(f"{e}: {report.first_failure}")
    if all(popcount(image) == 1 for image in e.table):
        return Embedding(e, Kind.EXTENSIVE)
    h = candidate_adjoint(e)
    if h is not None:
        insertion = GaloisInsertion(e.source, e.target, e, h)
        if verify_insertion(insertion):
            return Embedding(e, Kind.INTENSIVE, h)
    return Embedding(e, Kind.GENERAL)


@dataclass(frozen=True)
class Decomposition:
    """e = second∘first, with first/second extensive/intensive according to order."""

    gamma: StateSpace
    first: SpecMap
    second: SpecMap
    order: str

    @property
    def extensive(self):
        return self.second if self.order == "ext-int" else self.first

    @property
    def intensive(self):
        return self.first if self.order == "ext-int" else self.second

    def composite(self):
        return compose(self.second, self.first)


def decompose_embedding(e, order="ext-int"):
    if order not in ("ext-int", "int-ext"):
        raise ValueError(f"unknown factor order {order!r}")
    report = verify_order_embedding(e)
    if not report:
        raise NotOrderEmbedding(f"{e}: {report.first_failure}")
    seen = 0
    for i, image in enumerate(e.table):
        if seen & image:
            raise OverlappingImages(f"e({{{e.source.label(i)}}}) overlaps an earlier image")
        seen |= image
    source, target = e.source, e.target

    if order == "ext-int":
        hit = list(iter_bits(seen))
        gamma = StateSpace([target.label(j) for j in hit])
        position = {j: k for k, j in enumerate(hit)}
        intensive = SpecMap(
            source,
            gamma,
            tuple(sum(1 << position[j] for j in iter_bits(image)) for image in e.table),
            "e_int",
        )
        extensive = SpecMap(gamma, target, tuple(1 << j for j in hit), "e_ext")
        return Decomposition(gamma, intensive, extensive, order)

    unhit = [j for j in range(target.size) if not seen >> j & 1]
    labels = list(source.labels)
    for j in unhit:
        label = target.label(j)
        while label in labels:
            label += "'"
        labels.append(label)
    gamma = StateSpace(labels)
    extensive = SpecMap(source, gamma, tuple(1 << i for i in range(source.size)), "e_ext")
    intensive = SpecMap(gamma, target, e.table + tuple(1 << j for j in unhit), "e_int")
    return Decomposition(gamma, extensive, intensive, order)


def as_insertion(embedding):
    if isinstance(embedding, GaloisInsertion):
        return embedding
    if isinstance(embedding, SpecMap):
        embedding = classify_embedding(embedding)
    return embedding.insertion


def nest(first, second, direction="compose"):
    """Nested intensive embeddings.

    compose: first embeds A in AB, second embeds AB in ABC; returns A in ABC.
    middle: first embeds AB in ABC, second embeds A in ABC; returns A in AB.
    """
    first, second = as_insertion(first), as_insertion(second)
    if direction == "compose":
        same_space(first.big, second.small)
        result = GaloisInsertion(
            first.small,
            second.big,
            compose(second.e, first.e),
            compose(first.h, second.h),
            f"{second.name}.{first.name}",
        )
    elif direction == "middle":
        same_space(first.big, second.big)
        outer, inner = first.lumping_map.table, second.lumping_map.table
        for i, (a, b) in enumerate(zip(outer, inner)):
            if a & ~b:
                raise LumpingOrderViolated(
                    f"the lumping onto {first.small} is not finer than the one onto "
                    f"{second.small} at {first.big.label(i)}"
                )
        result = GaloisInsertion(
            second.small,
            first.small,
            compose(first.h, second.e),
            compose(second.h, first.e),
            f"{second.name}/{first.name}",
        )
    else:
        raise ValueError(f"unknown nesting direction {direction!r}")
    report = verify_insertion(result)
    if not report:
        raise InternalInconsistency(f"nested embedding is not an insertion: {report.first_failure}")
    return result


def is_local(lumping, v):
    same_space(lumping.space, v.space)
    return lumping.map.image_mask(v.mask) == v.mask


def agent_maps(theory, agent):
    maps = tuple(agent.elements if hasattr(agent, "elements") else agent)
    for f in maps:
        if f not in theory.monoid:
            raise NotSubmonoid(f"{f} is not an element of the theory")
    return maps


def restrict_theory(theory, agent, insertion, cap=None, name=None):
    """Restricted agent: the closure of {h∘f∘e : f ∈ A} on the reduced space."""
    same_space(insertion.big, theory.space)
    reduced = [
        compose(insertion.h, compose(f, insertion.e)).named(f"~{f.name}" if f.name else None)
        for f in agent_maps(theory, agent)
    ]
    return ResourceTheory(insertion.small, close_monoid(insertion.small, reduced, cap), name)


def effective_theory(theory, agent, insertion, side, cap=None, name=None):
    """Effective theory induced by the side resource K: V ↦ h(f(e(V) ∩ K))."""
    same_space(insertion.big, theory.space)
    same_space(side.space, theory.space)
    small = insertion.small
    if insertion.h.image_mask(side.mask) != small.full_mask:
        raise IncompatibleSideResource(f"h({side}) is not the whole reduced space")
    restricted_inputs = []
    for i, image in enumerate(insertion.e.table):
        overlap = image & side.mask
        if not overlap:
            raise EmptyIntersection(
                f"e({{{small.label(i)}}}) does not meet {side}", witness=small.label(i)
            )
        restricted_inputs.append(overlap)
    induced = []
    for f in agent_maps(theory, agent):
        table = tuple(insertion.h.image_mask(f.image_mask(mask)) for mask in restricted_inputs)
        induced.append(SpecMap(small, small, table, f"~{f.name}|K" if f.name else None))
    return ResourceTheory(small, close_monoid(small, induced, cap), name)


def lumping_from_maps(maps, space=None):
    """Lumping generated by homomorphisms: states with equal images are identified.

    Returns the lumping together with the number of squaring steps needed to
    reach idempotence.
    """
    maps = list(maps)
    if space is None:
        if not maps:
            raise ValueError("a space is required when no maps are given")
        space = maps[0].source
    for f in maps:
        same_space(f.source, space)
    table = [1 << i for i in range(space.size)]
    for f in maps:
        for i in range(space.size):
            for j in range(space.size):
                if f.table[j] == f.table[i]:
                    table[i] |= 1 << j
    table = tuple(table)
    iterations = 0
    while True:
        squared = compose_tables(table, table)
        if squared == table:
            break
        table = squared
        iterations += 1
    if iterations:
        logger.debug(f"generated lumping reached idempotence after {iterations} squarings")
    return Lumping(SpecMap(space, space, table)), iterations


def is_extensive(e):
    return classify_embedding(e).kind is Kind.EXTENSIVE


def is_intensive(e):
    return classify_embedding(e).kind is Kind.INTENSIVE


def check_lumping_laws(lumping, v, w):
    """Quasi-endomorphism identities of a lumping on a pair of specifications."""
    same_space(v.space, w.space)
    report = CheckReport("lumping laws")
    f = lumping.map.image_mask
    report.require(f(f(v.mask) | f(w.mask)) == f(v.mask | w.mask), "Λ(Λ(V) ∪ Λ(W)) ≠ Λ(V ∪ W)")
    joint = f(v.mask) & f(w.mask)
    report.require(f(joint) == joint, "Λ(Λ(V) ∩ Λ(W)) ≠ Λ(V) ∩ Λ(W)")
    if v.mask & w.mask:
        report.require(
            f(v.mask & w.mask) & ~joint == 0, "Λ(V ∩ W) is not contained in Λ(V) ∩ Λ(W)"
        )
    return report

