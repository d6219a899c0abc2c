"""Finite specification spaces.

A specification is a nonempty subset of a finite state space, stored as an
int bitmask (bit i set iff state i is a member). Maps between specification
spaces are element-wise: they store one image per state and act on larger
specifications by union, so every map is a join homomorphism by construction.
"""

from dataclasses import dataclass, field
from functools import reduce
from operator import or_

from rtk.exceptions import (
    EmptySpecification,
    IncompleteMap,
    Incompatible,
    InvalidLabel,
    NotEndomorphism,
    SpaceMismatch,
    UnknownState,
)


def iter_bits(mask):
    """Yield the indices of the set bits of mask, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask):
    return bin(mask).count("1")


def union_of(table, mask):
    """Union of the table entries selected by mask."""
    return reduce(or_, (table[i] for i in iter_bits(mask)), 0)


@dataclass(frozen=True)
class StateSpace:
    labels: tuple
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise EmptySpecification("a state space needs at least one state")
        for label in labels:
            if not isinstance(label, str) or not label or label.split() != [label]:
                raise InvalidLabel(f"state labels must be nonempty tokens, got {label!r}")
        index = {label: i for i, label in enumerate(labels)}
        if len(index) != len(labels):
            raise InvalidLabel("state labels must be pairwise distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    @property
    def size(self):
        return len(self.labels)

    @property
    def full_mask(self):
        return (1 << len(self.labels)) - 1

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise UnknownState(label) from None

    def label(self, i):
        return self.labels[i]

    def full(self):
        return Specification(self, self.full_mask)

    def singleton(self, i):
        return Specification(self, 1 << i)

    def spec(self, names):
        return make_spec(self, names)

    def masks(self):
        """Every nonempty specification mask, in increasing order."""
        return range(1, self.full_mask + 1)

    def __str__(self):
        return "{" + " ".join(self.labels) + "}"


@dataclass(frozen=True)
class Specification:
    space: StateSpace
    mask: int

    def __post_init__(self):
        if self.mask == 0:
            raise EmptySpecification("the empty specification is not a state of knowledge")
        if self.mask < 0 or self.mask >> self.space.size:
            raise UnknownState(f"bit {self.mask.bit_length() - 1}")

    @property
    def members(self):
        return tuple(iter_bits(self.mask))

    @property
    def labels(self):
        return tuple(self.space.labels[i] for i in iter_bits(self.mask))

    def is_full(self):
        return self.mask == self.space.full_mask

    def issubset(self, other):
        same_space(self.space, other.space)
        return self.mask & ~other.mask == 0

    def __le__(self, other):
        return self.issubset(other)

    def __len__(self):
        return popcount(self.mask)

    def __contains__(self, label):
        return bool(self.mask >> self.space.index(label) & 1)

    def __str__(self):
        return "{" + " ".join(self.labels) + "}"


def same_space(left, right):
    if left != right:
        raise SpaceMismatch(f"{left} and {right} are different state spaces")


def make_spec(space, names):
    names = list(names)
    if not names:
        raise EmptySpecification("no states named")
    mask = 0
    for name in names:
        mask |= 1 << space.index(name)
    return Specification(space, mask)


def combine(v, w):
    """Combined knowledge V ∩ W."""
    same_space(v.space, w.space)
    mask = v.mask & w.mask
    if not mask:
        raise Incompatible(f"{v} and {w} contradict each other", clash=(v, w))
    return Specification(v.space, mask)


def forget(v, w):
    same_space(v.space, w.space)
    return Specification(v.space, v.mask | w.mask)


@dataclass(frozen=True)
class SpecMap:
    source: StateSpace
    target: StateSpace
    table: tuple
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        table = tuple(self.table)
        if len(table) != self.source.size:
            raise IncompleteMap(
                f"{self.name or 'map'} needs {self.source.size} images, got {len(table)}"
            )
        for i, image in enumerate(table):
            if not image:
                raise EmptySpecification(
                    f"{self.name or 'map'} sends {self.source.label(i)} to the empty set"
                )
            if image >> self.target.size:
                raise UnknownState(f"image bit {image.bit_length() - 1}")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_images(cls, source, target, images, name=None):
        """Build a map from {source label: target label or iterable of labels}."""
        table = []
        for label in source.labels:
            if label not in images:
                raise IncompleteMap(f"no image given for state {label!r}")
            image = images[label]
            if isinstance(image, str):
                image = [image]
            table.append(make_spec(target, image).mask)
        unknown = set(images) - set(source.labels)
        if unknown:
            raise UnknownState(sorted(unknown)[0])
        return cls(source, target, tuple(table), name)

    @classmethod
    def identity(cls, space, name="id"):
        return cls(space, space, tuple(1 << i for i in range(space.size)), name)

    def named(self, name):
        return SpecMap(self.source, self.target, self.table, name)

    def is_endomorphism(self):
        return self.source == self.target

    def is_deterministic(self):
        return all(image & (image - 1) == 0 for image in self.table)

    def image_mask(self, mask):
        return union_of(self.table, mask)

    def image(self, i):
        return Specification(self.target, self.table[i])

    def __call__(self, v):
        return apply(self, v)

    def describe(self):
        parts = []
        for i, image in enumerate(self.table):
            labels = [self.target.label(j) for j in iter_bits(image)]
            rhs = labels[0] if len(labels) == 1 else "{" + " ".join(labels) + "}"
            parts.append(f"{self.source.label(i)}->{rhs}")
        return " ".join(parts)

    def __str__(self):
        return self.name or f"<{self.describe()}>"


def apply(f, v):
    same_space(f.source, v.space)
    return Specification(f.target, f.image_mask(v.mask))


def compose_tables(f_table, g_table):
    """Table of f∘g given the raw tables (g acts first)."""
    return tuple(union_of(f_table, image) for image in g_table)


def composite_name(f, g):
    if f.name is None or g.name is None:
        return None
    if f.name == "id":
        return g.name
    if g.name == "id":
        return f.name
    return f"{f.name}*{g.name}"


def compose(f, g):
    """f∘g: apply g first, then f."""
    same_space(g.target, f.source)
    return SpecMap(g.source, f.target, compose_tables(f.table, g.table), composite_name(f, g))


def maps_equal(f, g):
    same_space(f.source, g.source)
    same_space(f.target, g.target)
    return f.table == g.table


def is_inflating(f):
    if not f.is_endomorphism():
        raise NotEndomorphism(f"{f} is not an endomorphism")
    return all(image >> i & 1 for i, image in enumerate(f.table))
