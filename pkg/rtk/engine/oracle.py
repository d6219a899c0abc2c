"""Brute-force reference implementations for small instances.

Nothing here reuses the optimized paths: states are handled as Python sets
of labels and hull membership by case analysis, so agreement with the
engine is evidence rather than tautology.
"""

import itertools
import logging
from fractions import Fraction

from django.conf import settings

from rtk.engine.theory import ReachWitness
from rtk.exceptions import DimMismatch, SpaceMismatch, TooLarge

logger = logging.getLogger(__name__)


def _image(f, labels):
    source, target = f.source, f.target
    result = set()
    for label in labels:
        image = f.table[source.labels.index(label)]
        result |= {target.labels[j] for j in range(target.size) if image >> j & 1}
    return result


def oracle_reaches(theory, v, w):
    if theory.space.size > settings.RTK_ORACLE_MAX_STATES:
        raise TooLarge(f"the reachability oracle handles at most {settings.RTK_ORACLE_MAX_STATES} states")
    if v.space != theory.space or w.space != theory.space:
        raise SpaceMismatch("specifications live on a different space")
    start, goal = set(v.labels), set(w.labels)
    for f in theory.monoid.elements:
        if _image(f, start) <= goal:
            return ReachWitness(True, f)
    return ReachWitness(False)


def oracle_commutant(theory, agent):
    """Elements g of the theory with f∘g = g∘f for every f in the agent."""
    monoid = getattr(theory, "monoid", theory)
    if len(monoid.elements) > settings.RTK_ORACLE_MAX_ELEMENTS:
        raise TooLarge(f"the commutant oracle handles at most {settings.RTK_ORACLE_MAX_ELEMENTS} elements")
    agent = list(getattr(agent, "elements", agent))
    found = []
    for g in monoid.elements:
        commutes = True
        for f in agent:
            for label in g.source.labels:
                f_after_g = _image(f, _image(g, [label]))
                g_after_f = _image(g, _image(f, [label]))
                if f_after_g != g_after_f:
                    commutes = False
                    break
            if not commutes:
                break
        if commutes:
            found.append(g)
    return found


def _det(a, b, c):
    """Twice the signed area of the triangle abc."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, x):
    if _det(a, b, x) != 0:
        return False
    return min(a[0], b[0]) <= x[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= x[1] <= max(a[1], b[1])


def _in_triangle(a, b, c, x):
    """Barycentric coordinates by Cramer's rule, all of them nonnegative."""
    total = _det(a, b, c)
    if total == 0:
        return False
    l1 = Fraction(_det(x, b, c), total)
    l2 = Fraction(_det(a, x, c), total)
    l3 = 1 - l1 - l2
    return l1 >= 0 and l2 >= 0 and l3 >= 0


def oracle_hull_contains(v, x):
    points = [tuple(p.coords) for p in v]
    target = tuple(x.coords)
    if len(points) > settings.RTK_ORACLE_MAX_POINTS or x.dim > settings.RTK_ORACLE_MAX_DIM:
        raise TooLarge(
            f"the hull oracle handles at most {settings.RTK_ORACLE_MAX_POINTS} points "
            f"in dimension {settings.RTK_ORACLE_MAX_DIM}"
        )
    if any(len(p) != len(target) for p in points):
        raise DimMismatch("point dimensions differ")
    if target in points:
        return True
    if len(target) == 1:
        values = [p[0] for p in points]
        return min(values) <= target[0] <= max(values)
    for a, b in itertools.combinations(points, 2):
        if _on_segment(a, b, target):
            return True
    for a, b, c in itertools.combinations(points, 3):
        if _in_triangle(a, b, c, target):
            return True
    return False
