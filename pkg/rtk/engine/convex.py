"""Exact rational convex structures on finite point sets.

Points carry Fraction coordinates and floats are refused outright. A point
specification stands for its convex hull, which is never materialized: only
membership and extreme points are computed.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import Matrix, Rational
from sympy.solvers.simplex import InfeasibleLPError, linprog

from rtk.engine.reports import CheckReport
from rtk.exceptions import (
    BadProbability,
    DimMismatch,
    EmptySpecification,
    LengthMismatch,
    NotFree,
    ParseError,
)

logger = logging.getLogger(__name__)


def rational(value):
    if isinstance(value, float):
        raise TypeError(f"floating point value {value!r} in exact arithmetic")
    return Fraction(value)


def parse_rational(token, line=1, col=1):
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, col, f"{token!r} is not a rational number") from None


def probability(p):
    p = rational(p)
    if not 0 <= p <= 1:
        raise BadProbability(f"{p} is not a probability")
    return p


@dataclass(frozen=True, order=True)
class RationalPoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(rational(c) for c in self.coords))

    @classmethod
    def of(cls, *coords):
        return cls(coords)

    @classmethod
    def parse(cls, text):
        return cls(tuple(parse_rational(m.group(), col=m.start() + 1) for m in re.finditer(r"\S+", text)))

    @property
    def dim(self):
        return len(self.coords)

    def __str__(self):
        return " ".join(str(c) for c in self.coords)


def _same_dim(*dims):
    if len(set(dims)) > 1:
        raise DimMismatch(f"dimensions {sorted(set(dims))} do not match")


@dataclass(frozen=True)
class Distribution:
    weights: tuple

    def __post_init__(self):
        weights = tuple(rational(w) for w in self.weights)
        if any(w < 0 for w in weights):
            raise BadProbability("negative weight")
        if sum(weights) != 1:
            raise BadProbability(f"weights sum to {sum(weights)}, not 1")
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class PointSpec:
    points: tuple

    def __post_init__(self):
        points = tuple(sorted(set(self.points)))
        if not points:
            raise EmptySpecification("a point specification needs at least one point")
        _same_dim(*(x.dim for x in points))
        object.__setattr__(self, "points", points)

    @classmethod
    def of(cls, *points):
        return cls(tuple(p if isinstance(p, RationalPoint) else RationalPoint((p,)) for p in points))

    @property
    def dim(self):
        return self.points[0].dim

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in self.points

    def union(self, other):
        _same_dim(self.dim, other.dim)
        return PointSpec(self.points + other.points)

    def __str__(self):
        return "{" + ", ".join(f"({x})" for x in self.points) + "}"


@dataclass(frozen=True)
class AffineMap:
    """x ↦ Mx + b with rational entries."""

    matrix: tuple
    offset: tuple
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        matrix = tuple(tuple(rational(a) for a in row) for row in self.matrix)
        offset = tuple(rational(b) for b in self.offset)
        if len(matrix) != len(offset):
            raise DimMismatch(f"{len(matrix)} rows but {len(offset)} offsets")
        if len({len(row) for row in matrix}) > 1:
            raise DimMismatch("matrix rows have different lengths")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def identity(cls, dim, name="id"):
        return cls(
            tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)), (0,) * dim, name
        )

    @classmethod
    def constant(cls, point, in_dim=None, name=None):
        in_dim = point.dim if in_dim is None else in_dim
        return cls(tuple((0,) * in_dim for _ in point.coords), point.coords, name)

    @property
    def in_dim(self):
        return len(self.matrix[0]) if self.matrix else 0

    @property
    def out_dim(self):
        return len(self.offset)

    def __call__(self, x):
        if isinstance(x, PointSpec):
            return apply_affine(self, x)
        _same_dim(self.in_dim, x.dim)
        return RationalPoint(
            tuple(sum(a * c for a, c in zip(row, x.coords)) + b for row, b in zip(self.matrix, self.offset))
        )

    def __str__(self):
        return self.name or f"affine {self.in_dim}->{self.out_dim}"


def apply_affine(g, v):
    return PointSpec(tuple(g(x) for x in v))


def compose_affine(f, g):
    """f∘g."""
    _same_dim(f.in_dim, g.out_dim)
    matrix = tuple(
        tuple(sum(f.matrix[i][k] * g.matrix[k][j] for k in range(g.out_dim)) for j in range(g.in_dim))
        for i in range(f.out_dim)
    )
    offset = tuple(
        sum(f.matrix[i][k] * g.offset[k] for k in range(g.out_dim)) + f.offset[i]
        for i in range(f.out_dim)
    )
    name = f"{f.name}*{g.name}" if f.name and g.name else None
    return AffineMap(matrix, offset, name)


def mix(p, x, y):
    p = probability(p)
    _same_dim(x.dim, y.dim)
    return RationalPoint(tuple(p * a + (1 - p) * b for a, b in zip(x.coords, y.coords)))


def weighted_sum(weights, points):
    weights = Distribution(weights).weights
    if len(weights) != len(points):
        raise LengthMismatch(f"{len(weights)} weights for {len(points)} points")
    _same_dim(*(x.dim for x in points))
    return RationalPoint(
        tuple(sum(w * x.coords[d] for w, x in zip(weights, points)) for d in range(points[0].dim))
    )


def nested_coefficients(distribution):
    """p′_1 = p_1 and p′_k = p_k / ∏_{i<k}(1 − p′_i), zero once nothing remains."""
    coefficients = []
    remaining = Fraction(1)
    for p in distribution.weights:
        coefficients.append(p / remaining if remaining else Fraction(0))
        remaining *= 1 - coefficients[-1]
    return coefficients


def nested_mixture(distribution, points):
    if not isinstance(distribution, Distribution):
        distribution = Distribution(distribution)
    points = tuple(points)
    if len(distribution) != len(points):
        raise LengthMismatch(f"{len(distribution)} weights for {len(points)} points")
    _same_dim(*(x.dim for x in points))
    coefficients = nested_coefficients(distribution)
    result = points[-1]
    for p, x in zip(reversed(coefficients[:-1]), reversed(points[:-1])):
        result = mix(p, x, result)
    return result


def mix_specs(p, v, w):
    _same_dim(v.dim, w.dim)
    return PointSpec(tuple(mix(p, x, y) for x in v for y in w))


def _solve_weights(points, x):
    """Feasibility of λ ≥ 0, Σλ = 1, Σλ_i y_i = x, by exact simplex."""
    n = len(points)
    rows, bounds = [], []
    for d in range(x.dim):
        row = [Rational(y.coords[d].numerator, y.coords[d].denominator) for y in points]
        target = Rational(x.coords[d].numerator, x.coords[d].denominator)
        rows += [row, [-a for a in row]]
        bounds += [target, -target]
    rows += [[1] * n, [-1] * n]
    bounds += [1, -1]
    try:
        linprog([0] * n, Matrix(rows), Matrix(bounds))
    except InfeasibleLPError:
        return False
    return True


def hull_contains(v, x):
    _same_dim(v.dim, x.dim)
    if x in v:
        return True
    if len(v) == 1:
        return False
    for d in range(x.dim):
        values = [y.coords[d] for y in v]
        if not min(values) <= x.coords[d] <= max(values):
            return False
    if x.dim == 1:
        return True
    return _solve_weights(v.points, x)


def extreme_points(v):
    """Points that are not convex combinations of the others."""
    if len(v) == 1:
        return v
    kept = []
    for x in v:
        others = tuple(y for y in v if y != x)
        if not hull_contains(PointSpec(others), x):
            kept.append(x)
    return PointSpec(tuple(kept))


def prob_equivalent(v, w):
    _same_dim(v.dim, w.dim)
    return extreme_points(v) == extreme_points(w)


def hull_union(v, w):
    """Extreme points of hull(V ∪ W), which equal those of hull(hull(V) ∪ hull(W))."""
    _same_dim(v.dim, w.dim)
    return extreme_points(v.union(w))


def hull_intersection_witness(v, w, x):
    """True iff x lies in hull(V) ∩ hull(W)."""
    _same_dim(v.dim, w.dim, x.dim)
    return hull_contains(v, x) and hull_contains(w, x)


def check_hull_laws(v, w):
    """Hull is inflating, idempotent and monotone; hull(V ∪ W) = hull(hull(V) ∪ hull(W))."""
    report = CheckReport("convex hull")
    union = v.union(w)
    report.require(all(hull_contains(v, x) for x in v), "hull is not inflating")
    report.require(
        prob_equivalent(extreme_points(v), v), "hull of the extreme points differs from the hull"
    )
    report.require(all(hull_contains(union, x) for x in v), "hull is not monotone")
    report.require(
        hull_union(v, w) == hull_union(extreme_points(v), extreme_points(w)),
        "hull(V ∪ W) ≠ hull(hull(V) ∪ hull(W))",
    )
    shared = tuple(x for x in v if x in w)
    if shared:
        report.require(
            all(hull_intersection_witness(v, w, x) for x in shared),
            "hull(V ∩ W) ⊄ hull(V) ∩ hull(W)",
        )
    return report


def check_convexity_preserving(g, v, w, ps):
    """g(mix(p, ν, ω)) = mix(p, g(ν), g(ω)) on all sampled pairs.

    g is an AffineMap or any callable on points; for affine maps the images
    of extreme points of V ∪ W must cover the extreme points of g(V ∪ W).
    """
    _same_dim(v.dim, w.dim)
    report = CheckReport("convexity preserving")
    for p, x, y in itertools.product(ps, v, w):
        left = g(mix(p, x, y))
        right = mix(p, g(x), g(y))
        if left != right:
            report.fail(f"g(mix({p}, {x}, {y})) = {left} but mix of images is {right}")
            report.details["witness"] = str(p)
            return report
    if isinstance(g, AffineMap):
        union = v.union(w)
        images = {g(x) for x in extreme_points(union)}
        report.require(
            set(extreme_points(apply_affine(g, union))) <= images,
            "an extreme point of g(V ∪ W) is not the image of an extreme point",
        )
    return report


def mix_maps(p, f, g):
    """c_p(f, g): the entrywise p-blend of two affine maps."""
    p = probability(p)
    _same_dim(f.in_dim, g.in_dim)
    _same_dim(f.out_dim, g.out_dim)
    matrix = tuple(
        tuple(p * a + (1 - p) * b for a, b in zip(row_f, row_g)) for row_f, row_g in zip(f.matrix, g.matrix)
    )
    offset = tuple(p * a + (1 - p) * b for a, b in zip(f.offset, g.offset))
    name = f"c[{p}]({f.name},{g.name})" if f.name and g.name else None
    return AffineMap(matrix, offset, name)


def check_doubly_convex(maps, domain, ps):
    """Mixing maps agrees with mixing their outputs, and respects composition.

    On single points the equivalence is exact; on larger subsets the hull of
    the mixed map's image must lie in the hull of the mixed images, and the
    subsets where it is strictly smaller are counted in the details.
    """
    maps = list(maps)
    report = CheckReport("doubly convex")
    for f in maps:
        _same_dim(f.in_dim, f.out_dim, domain.dim)
    subsets = [PointSpec((x,)) for x in domain]
    if len(domain) > 1:
        subsets.append(domain)
    strict = 0
    for p, f in itertools.product(ps, maps):
        report.require(mix_maps(p, f, f) == f, f"c_{p}({f}, {f}) ≠ {f}")
    for p, f, g in itertools.product(ps, maps, maps):
        mixed = mix_maps(p, f, g)
        for v in subsets:
            image = apply_affine(mixed, v)
            blended = mix_specs(p, apply_affine(f, v), apply_affine(g, v))
            if len(v) == 1:
                report.require(prob_equivalent(image, blended), f"c_{p}({f},{g}) differs on {v}")
            elif not all(hull_contains(blended, x) for x in image):
                report.fail(f"c_{p}({f},{g})({v}) leaves the hull of the mixed images")
            elif not prob_equivalent(image, blended):
                strict += 1
        for h in maps:
            report.require(
                mix_maps(p, compose_affine(h, f), compose_affine(h, g)) == compose_affine(h, mixed),
                f"c_p({h}∘{f}, {h}∘{g}) ≠ {h}∘c_p({f}, {g})",
            )
            report.require(
                mix_maps(p, compose_affine(f, h), compose_affine(g, h)) == compose_affine(mixed, h),
                f"c_p({f}∘{h}, {g}∘{h}) ≠ c_p({f}, {g})∘{h}",
            )
    report.details["strict"] = strict
    return report


def free_state(f, domain):
    """The single point f sends the whole domain to, if any."""
    image = apply_affine(f, domain)
    if len(image) != 1:
        raise NotFree(f"{f} does not prepare a single point from every input")
    return image.points[0]


def check_free_state_mixture(f, g, p, domain):
    """If f and g prepare ν and ω from anything, c_p(f, g) prepares mix(p, ν, ω)."""
    nu, omega = free_state(f, domain), free_state(g, domain)
    witness = mix_maps(p, f, g)
    report = CheckReport("free state mixture", details={"witness": str(witness)})
    report.require(
        apply_affine(witness, domain) == PointSpec((mix(p, nu, omega),)),
        f"{witness} does not prepare mix({p}, {nu}, {omega})",
    )
    return witness, report
