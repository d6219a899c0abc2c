"""Resource theories: a specification space with a finite monoid of maps."""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

from django.conf import settings

from rtk.engine.spec_core import (
    SpecMap,
    Specification,
    same_space,
    compose_tables,
    iter_bits,
)
from rtk.exceptions import CapExceeded, NotEndomorphism, NotInMonoid, SpaceMismatch

logger = logging.getLogger(__name__)


class TransformationMonoid:
    """A composition-closed, identity-containing, ordered set of endomorphisms.

    Element order is the saturation order of close_monoid, generators first.
    Subsets of a monoid are handled as bitmasks over element positions.
    """

    def __init__(self, space, elements):
        self.space = space
        self.elements = tuple(elements)
        self._position = {m.table: i for i, m in enumerate(self.elements)}
        identity = SpecMap.identity(space)
        if identity.table not in self._position:
            raise NotInMonoid("a monoid must contain the identity")
        self.identity_index = self._position[identity.table]

    @property
    def identity(self):
        return self.elements[self.identity_index]

    @property
    def full_mask(self):
        return (1 << len(self.elements)) - 1

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, f):
        return f.source == self.space and f.target == self.space and f.table in self._position

    def index_of(self, f):
        if f.source != self.space or f.target != self.space:
            raise SpaceMismatch(f"{f} does not act on {self.space}")
        try:
            return self._position[f.table]
        except KeyError:
            raise NotInMonoid(f"{f} is not an element of the monoid") from None

    def find(self, f):
        return self.elements[self.index_of(f)]

    def index_of_table(self, table):
        return self._position.get(table)

    def mask_of(self, maps):
        mask = 0
        for f in maps:
            mask |= 1 << self.index_of(f)
        return mask

    def maps_of(self, mask):
        return tuple(self.elements[i] for i in iter_bits(mask))

    def product_index(self, i, j):
        """Position of elements[i]∘elements[j]."""
        table = compose_tables(self.elements[i].table, self.elements[j].table)
        return self._position[table]

    @cached_property
    def commute_masks(self):
        """For each element, the mask of elements it commutes with.

        Singleton tables suffice because every element acts element-wise.
        """
        tables = [m.table for m in self.elements]
        masks = [0] * len(tables)
        for i, f in enumerate(tables):
            masks[i] |= 1 << i
            for j in range(i + 1, len(tables)):
                g = tables[j]
                if compose_tables(f, g) == compose_tables(g, f):
                    masks[i] |= 1 << j
                    masks[j] |= 1 << i
        logger.debug(f"commutation table built for {len(tables)} elements")
        return masks

    def is_closed(self, mask):
        """True iff the selected elements contain the identity and are closed under composition."""
        if not mask >> self.identity_index & 1:
            return False
        members = list(iter_bits(mask))
        for i, j in itertools.product(members, repeat=2):
            if not mask >> self.product_index(i, j) & 1:
                return False
        return True

    def __repr__(self):
        return f"TransformationMonoid({self.space}, {len(self.elements)} elements)"


@dataclass(frozen=True)
class ResourceTheory:
    space: object
    monoid: TransformationMonoid
    name: str = None

    def __post_init__(self):
        if self.monoid.space != self.space:
            raise SpaceMismatch("the monoid acts on a different space")

    @property
    def elements(self):
        return self.monoid.elements


@dataclass(frozen=True)
class ReachWitness:
    found: bool
    map: SpecMap = None

    def __bool__(self):
        return self.found


def _cap(cap):
    return settings.RTK_MONOID_CAP if cap is None else cap


def close_monoid(space, generators, cap=None):
    """Least composition-closed set containing generators and the identity."""
    cap = _cap(cap)
    if cap < 1:
        raise ValueError("cap must be at least 1")
    generators = list(generators)
    for g in generators:
        if not g.is_endomorphism():
            raise NotEndomorphism(f"{g} is not an endomorphism")
        same_space(g.source, space)

    elements = {}
    queue = []

    def admit(table, name):
        if table in elements:
            return
        if len(elements) >= cap:
            raise CapExceeded(len(elements) + 1, cap)
        elements[table] = SpecMap(space, space, table, name)
        queue.append(table)

    for g in generators:
        admit(g.table, g.name)
    identity = SpecMap.identity(space)
    admit(identity.table, identity.name)

    unique_generators = [elements[t] for t in dict.fromkeys(g.table for g in generators)]
    position = 0
    while position < len(queue):
        current = elements[queue[position]]
        position += 1
        for g in unique_generators:
            table = compose_tables(g.table, current.table)
            if table not in elements:
                name = None if g.name is None or current.name is None else f"{g.name}*{current.name}"
                admit(table, name)
    logger.debug(f"closed {len(generators)} generators into {len(elements)} elements")
    return TransformationMonoid(space, elements.values())


def make_theory(space, generators, cap=None, name=None):
    return ResourceTheory(space, close_monoid(space, generators, cap), name)


def deterministic_maps(space):
    """All |Ω|^|Ω| deterministic endomorphisms, named by their image lists."""
    for images in itertools.product(range(space.size), repeat=space.size):
        name = "<" + ",".join(space.label(i) for i in images) + ">"
        yield SpecMap(space, space, tuple(1 << i for i in images), name)


def permutation_maps(space):
    for images in itertools.permutations(range(space.size)):
        name = "<" + ",".join(space.label(i) for i in images) + ">"
        yield SpecMap(space, space, tuple(1 << i for i in images), name)


def _check_space(theory, *specs):
    for v in specs:
        same_space(theory.space, v.space)


def reaches(theory, v, w):
    _check_space(theory, v, w)
    for f in theory.monoid.elements:
        if f.image_mask(v.mask) & ~w.mask == 0:
            return ReachWitness(True, f)
    return ReachWitness(False)


def is_free(theory, v):
    return reaches(theory, theory.space.full(), v).found


@dataclass(frozen=True)
class Quotient:
    """Mutual-convertibility classes and the order induced by reachability.

    ``order`` holds (i, j) whenever class i reaches class j, reflexive pairs
    included. ``top`` is the class of Ω; ``free`` flags classes reachable from Ω.
    """

    classes: tuple
    order: frozenset
    top: int
    free: tuple

    def reaches(self, i, j):
        return (i, j) in self.order

    def class_of(self, v):
        for i, members in enumerate(self.classes):
            if v in members:
                return i
        raise KeyError(str(v))


def quotient(theory, candidates=(), all_specs=False, limit=None):
    limit = settings.RTK_EXHAUSTIVE_STATES if limit is None else limit
    space = theory.space
    if all_specs:
        if space.size > limit:
            raise ValueError(f"--all-specs is limited to {limit} states")
        candidates = [Specification(space, mask) for mask in space.masks()]
    specs = list(dict.fromkeys(candidates))
    _check_space(theory, *specs)
    if space.full() not in specs:
        specs.append(space.full())

    reach = {(v, w): reaches(theory, v, w).found for v in specs for w in specs}
    classes = []
    for v in specs:
        for members in classes:
            if reach[v, members[0]] and reach[members[0], v]:
                members.append(v)
                break
        else:
            classes.append([v])
    classes = tuple(tuple(members) for members in classes)
    order = frozenset(
        (i, j)
        for i, a in enumerate(classes)
        for j, b in enumerate(classes)
        if reach[a[0], b[0]]
    )
    top = next(i for i, members in enumerate(classes) if space.full() in members)
    free = tuple((top, i) in order for i in range(len(classes)))
    return Quotient(classes, order, top, free)


def is_conserved(theory, v):
    _check_space(theory, v)
    return all(f.image_mask(v.mask) == v.mask for f in theory.monoid.elements)


def resource_independent_maps(theory):
    """Elements with a constant image, paired with that (free) image."""
    found = []
    for f in theory.monoid.elements:
        if len(set(f.table)) == 1:
            found.append((f, Specification(theory.space, f.table[0])))
    return found


def combine_theories(theory, other, name=None):
    same_space(theory.space, other.space)
    shared = [f for f in theory.monoid.elements if f in other.monoid]
    return ResourceTheory(theory.space, TransformationMonoid(theory.space, shared), name)

