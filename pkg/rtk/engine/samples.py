"""Seeded random instances and the worked two-bit example.

Every generator takes a ``random.Random`` so that suites are reproducible
from a single seed.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

from rtk.engine.approx import distance_structure, hamming
from rtk.engine.convex import AffineMap, Distribution, PointSpec, RationalPoint
from rtk.engine.embed import Lumping, insertion_from_lumping
from rtk.engine.locality import subsystem
from rtk.engine.spec_core import SpecMap, Specification, StateSpace
from rtk.engine.theory import ResourceTheory, deterministic_maps, make_theory
from rtk.exceptions import CapExceeded

logger = logging.getLogger(__name__)

LETTERS = "abcdefgh"


def letter_space(size):
    return StateSpace(tuple(LETTERS[:size]))


def bit_space(bits):
    return StateSpace(tuple("".join(word) for word in itertools.product("01", repeat=bits)))


def random_mask(rng, size, spread=0.25):
    """A nonempty mask, a single state most of the time."""
    if rng.random() >= spread:
        return 1 << rng.randrange(size)
    return rng.randint(1, (1 << size) - 1)


def random_spec(rng, space):
    return Specification(space, rng.randint(1, space.full_mask))


def random_map(rng, space, name=None, spread=0.25):
    return SpecMap(space, space, tuple(random_mask(rng, space.size, spread) for _ in range(space.size)), name)


def random_theory(rng, max_states=5, max_generators=3, max_elements=20, attempts=50):
    """A random theory whose monoid stays within max_elements."""
    for _ in range(attempts):
        space = letter_space(rng.randint(1, max_states))
        generators = [random_map(rng, space, f"g{k}") for k in range(rng.randint(0, max_generators))]
        try:
            return make_theory(space, generators, cap=max_elements)
        except CapExceeded:
            continue
    logger.debug("falling back to the trivial theory after repeated cap overflows")
    return make_theory(letter_space(rng.randint(1, max_states)), [])


def random_blocks(rng, size, max_blocks=None):
    """Assign each state a block; returns the block masks in first-state order."""
    max_blocks = size if max_blocks is None else max_blocks
    assignment = [rng.randrange(max_blocks) for _ in range(size)]
    blocks = {}
    for i, block in enumerate(assignment):
        blocks[block] = blocks.get(block, 0) | 1 << i
    return list(blocks.values())


def random_partition_lumping(rng, space, name=None):
    table = [0] * space.size
    for block in random_blocks(rng, space.size):
        for i in range(space.size):
            if block >> i & 1:
                table[i] = block
    return Lumping(SpecMap(space, space, tuple(table), name))


def random_embedding(rng, max_target=5):
    """An order embedding with pairwise disjoint images; some target states may stay unhit."""
    target = letter_space(rng.randint(1, max_target))
    hit = [i for i in range(target.size) if rng.random() < 0.8] or [0]
    blocks = [0] * rng.randint(1, len(hit))
    order = list(hit)
    rng.shuffle(order)
    for k, i in enumerate(order):
        position = k if k < len(blocks) else rng.randrange(len(blocks))
        blocks[position] |= 1 << i
    source = StateSpace(tuple(f"s{k}" for k in range(len(blocks))))
    return SpecMap(source, target, tuple(blocks), "e")


def random_insertion_pair(rng, max_states=5):
    space = letter_space(rng.randint(1, max_states))
    first = random_partition_lumping(rng, space, "A")
    second = random_partition_lumping(rng, space, "B")
    return insertion_from_lumping(first), insertion_from_lumping(second)


def _line_distance(x, y):
    return abs(LETTERS.index(x) - LETTERS.index(y))


@dataclass(frozen=True)
class ApproxInstance:
    theory: ResourceTheory
    structure: object


def random_approx_instance(rng):
    """Balls on a cube or a line, acted on by isometries and a few constants.

    Such theories are stable for their balls, so robustness transfers along
    reachability.
    """
    if rng.random() < 0.5:
        space = bit_space(rng.randint(1, 3))
        bits = len(space.label(0))
        structure = distance_structure(space, hamming, range(bits + 1), "hamming")
        generators = [_flip(space, rng.randrange(bits))]
        if bits > 1:
            generators.append(_bit_exchange(space, *rng.sample(range(bits), 2)))
    else:
        size = rng.randint(2, 5)
        space = letter_space(size)
        structure = distance_structure(space, _line_distance, range(size), "line")
        generators = [SpecMap(space, space, tuple(1 << (size - 1 - i) for i in range(size)), "mirror")]
    for k in range(rng.randint(0, 2)):
        target = rng.randrange(space.size)
        generators.append(SpecMap(space, space, (1 << target,) * space.size, f"c{k}"))
    theory = make_theory(space, rng.sample(generators, rng.randint(0, len(generators))))
    return ApproxInstance(theory, structure)


def _flip(space, bit):
    def flipped(word):
        return word[:bit] + ("1" if word[bit] == "0" else "0") + word[bit + 1 :]

    return SpecMap(space, space, tuple(1 << space.index(flipped(w)) for w in space.labels), f"flip{bit + 1}")


def _bit_exchange(space, i, j):
    def exchanged(word):
        chars = list(word)
        chars[i], chars[j] = chars[j], chars[i]
        return "".join(chars)

    return SpecMap(space, space, tuple(1 << space.index(exchanged(w)) for w in space.labels), "exchange")


def bit_maps(space, bit):
    """Identity, flip, reset to 0 and set to 1 on one bit, the others untouched."""

    def table(rule):
        images = []
        for word in space.labels:
            images.append(1 << space.index(word[:bit] + rule(word[bit]) + word[bit + 1 :]))
        return tuple(images)

    rules = {
        "id": lambda c: c,
        f"flip{bit + 1}": lambda c: "1" if c == "0" else "0",
        f"zero{bit + 1}": lambda c: "0",
        f"one{bit + 1}": lambda c: "1",
    }
    return [SpecMap(space, space, table(rule), name) for name, rule in rules.items()]


@dataclass(frozen=True)
class TwoBit:
    """All 256 deterministic maps on two bits with the one-bit subsystems."""

    theory: ResourceTheory
    a: object
    b: object
    exchange: SpecMap

    @property
    def iso(self):
        return list(zip(bit_maps(self.theory.space, 0), bit_maps(self.theory.space, 1)))


def two_bit_system():
    space = bit_space(2)
    theory = make_theory(space, deterministic_maps(space), name="T")
    a = subsystem(theory, [theory.monoid.find(f) for f in bit_maps(space, 0)], "A")
    b = subsystem(theory, [theory.monoid.find(f) for f in bit_maps(space, 1)], "B")
    exchange = theory.monoid.find(_bit_exchange(space, 0, 1))
    return TwoBit(theory, a, b, exchange)


def random_rational(rng, denominator=6, low=-2, high=2):
    return Fraction(rng.randint(low * denominator, high * denominator), denominator)


def random_point(rng, dim, denominator=6):
    return RationalPoint(tuple(random_rational(rng, denominator) for _ in range(dim)))


def random_point_spec(rng, dim, max_points=5):
    return PointSpec(tuple(random_point(rng, dim) for _ in range(rng.randint(1, max_points))))


def random_probability(rng, denominator=8):
    return Fraction(rng.randint(0, denominator), denominator)


def random_distribution(rng, size, denominator=12):
    """Nonnegative rational weights summing to one, zeros included now and then."""
    raw = [rng.choice((0, rng.randint(1, denominator))) for _ in range(size)]
    if not any(raw):
        raw[rng.randrange(size)] = 1
    total = sum(raw)
    return Distribution(tuple(Fraction(w, total) for w in raw))


def random_affine(rng, dim, name=None):
    return AffineMap(
        tuple(tuple(random_rational(rng, 2, -1, 1) for _ in range(dim)) for _ in range(dim)),
        tuple(random_rational(rng, 2, -1, 1) for _ in range(dim)),
        name,
    )
