"""Subsystems of transformations derived from commutation relations.

Subsystems are bitmasks over the positions of a parent monoid, so commutants
reduce to AND-ing the cached commutation rows of the parent.
"""

import itertools
import logging
from dataclasses import dataclass, field

from django.conf import settings

from rtk.engine.embed import (
    insertion_from_lumping,
    lumping_from_maps,
    restrict_theory,
)
from rtk.engine.reports import CheckReport
from rtk.engine.spec_core import (
    SpecMap,
    Specification,
    compose_tables,
    iter_bits,
    popcount,
    same_space,
    union_of,
)
from rtk.engine.theory import ResourceTheory, TransformationMonoid
from rtk.exceptions import (
    CapExceeded,
    Incompatible,
    IncompatibleW,
    InternalInconsistency,
    NotComplete,
    NotInJoin,
    NotIndependent,
    NotInMonoid,
    NotIsomorphism,
    NotLocal,
    NotSubmonoid,
    NotSubtheory,
    TooLarge,
)

logger = logging.getLogger(__name__)


def as_monoid(theory):
    return theory.monoid if isinstance(theory, ResourceTheory) else theory


@dataclass(frozen=True)
class Subsystem:
    parent: TransformationMonoid = field(compare=False, repr=False)
    mask: int
    name: str = field(default=None, compare=False)

    @property
    def elements(self):
        return self.parent.maps_of(self.mask)

    @property
    def space(self):
        return self.parent.space

    def __len__(self):
        return popcount(self.mask)

    def __contains__(self, f):
        if f not in self.parent:
            return False
        return bool(self.mask >> self.parent.index_of(f) & 1)

    def issubset(self, other):
        return self.mask & ~other.mask == 0

    def is_trivial(self):
        return self.mask == 1 << self.parent.identity_index

    def as_monoid(self):
        return TransformationMonoid(self.space, self.elements)

    def named(self, name):
        return Subsystem(self.parent, self.mask, name)

    def __str__(self):
        if self.name:
            return self.name
        names = [str(f) for f in self.elements]
        if len(names) <= 4:
            return "{" + ", ".join(names) + "}"
        return f"{len(names)} elements"


def subsystem(theory, maps, name=None):
    """The submonoid made of maps; they must contain the identity and be closed."""
    monoid = as_monoid(theory)
    if isinstance(maps, Subsystem):
        return maps
    mask = monoid.mask_of(maps.elements if hasattr(maps, "elements") else maps)
    if not monoid.is_closed(mask):
        raise NotSubmonoid(f"{name or 'the given maps'} do not form a submonoid")
    return Subsystem(monoid, mask, name)


def whole(theory):
    monoid = as_monoid(theory)
    return Subsystem(monoid, monoid.full_mask, "T")


def _mask(monoid, agent):
    if isinstance(agent, Subsystem):
        if agent.parent is not monoid:
            return monoid.mask_of(agent.elements)
        return agent.mask
    return monoid.mask_of(agent.elements if hasattr(agent, "elements") else agent)


def _as_subsystem(monoid, agent):
    return Subsystem(monoid, _mask(monoid, agent), getattr(agent, "name", None))


def _commutant_mask(monoid, mask):
    rows = monoid.commute_masks
    result = monoid.full_mask
    for i in iter_bits(mask):
        result &= rows[i]
    return result


def commutant(theory, agent):
    monoid = as_monoid(theory)
    return Subsystem(monoid, _commutant_mask(monoid, _mask(monoid, agent)))


def bicommutant(theory, agent):
    monoid = as_monoid(theory)
    return Subsystem(monoid, _completion(monoid, _mask(monoid, agent)))


def _completion(monoid, mask):
    return _commutant_mask(monoid, _commutant_mask(monoid, mask))


def is_complete(theory, agent):
    monoid = as_monoid(theory)
    mask = _mask(monoid, agent)
    return _completion(monoid, mask) == mask


def _require_complete(monoid, mask, label):
    if _completion(monoid, mask) != mask:
        raise NotComplete(f"{label} is not a complete subsystem")


def join(a, b):
    monoid = a.parent
    _require_complete(monoid, a.mask, a)
    _require_complete(monoid, _mask(monoid, b), b)
    return Subsystem(monoid, _completion(monoid, a.mask | _mask(monoid, b)))


def meet(a, b):
    monoid = a.parent
    _require_complete(monoid, a.mask, a)
    _require_complete(monoid, _mask(monoid, b), b)
    return Subsystem(monoid, _completion(monoid, a.mask & _mask(monoid, b)))


def centre(theory, agent=None):
    """A ∩ A′ (the centre of the whole monoid when agent is omitted)."""
    monoid = as_monoid(theory)
    mask = monoid.full_mask if agent is None else _mask(monoid, agent)
    if not monoid.is_closed(mask):
        raise NotSubmonoid("the centre is defined for submonoids")
    return Subsystem(monoid, mask & _commutant_mask(monoid, mask))


def is_centreless(theory, agent=None):
    return centre(theory, agent).is_trivial()


def are_independent(theory, a, b):
    monoid = as_monoid(theory)
    mask_a, mask_b = _mask(monoid, a), _mask(monoid, b)
    for mask in (mask_a, mask_b):
        if not monoid.is_closed(mask):
            raise NotSubmonoid("independence is defined for submonoids")
    return (
        mask_a & ~_commutant_mask(monoid, mask_b) == 0
        and mask_b & ~_commutant_mask(monoid, mask_a) == 0
        and mask_a & mask_b == 1 << monoid.identity_index
    )


def check_centreless_intersection(theory, a, b):
    """Commuting complete subsystems share only the identity when either is centreless."""
    monoid = as_monoid(theory)
    a, b = _as_subsystem(monoid, a), _as_subsystem(monoid, b)
    report = CheckReport("centreless intersection")
    commuting = a.mask & ~_commutant_mask(monoid, b.mask) == 0
    if not (commuting and is_complete(monoid, a) and is_complete(monoid, b)):
        report.details["applicable"] = False
        return report
    report.details["applicable"] = True
    if is_centreless(monoid, a) or is_centreless(monoid, b):
        report.require(
            a.mask & b.mask == 1 << monoid.identity_index,
            f"{a} and {b} share more than the identity",
        )
    return report


@dataclass(frozen=True)
class SubsystemLattice:
    """Complete subsystems found by closing seeds under join and meet.

    This is a lower approximation of the set of all complete subsystems when
    the seeds do not generate every commutant.
    """

    parent: TransformationMonoid = field(repr=False)
    nodes: tuple

    def index(self, node):
        return self.nodes.index(node)

    @property
    def bottom(self):
        return self.nodes[0]

    @property
    def top(self):
        return self.nodes[-1]

    def leq(self, i, j):
        return self.nodes[i].issubset(self.nodes[j])

    def order(self):
        return {(i, j) for i in range(len(self.nodes)) for j in range(len(self.nodes)) if self.leq(i, j)}

    def join(self, i, j):
        return self.index(join(self.nodes[i], self.nodes[j]))

    def meet(self, i, j):
        return self.index(meet(self.nodes[i], self.nodes[j]))


def _seed_masks(monoid, seeds):
    if seeds is None:
        return [1 << i for i in range(len(monoid))]
    masks = []
    for seed in seeds:
        group = [seed] if isinstance(seed, SpecMap) else seed
        masks.append(_mask(monoid, group))
    return masks


def enumerate_complete(theory, seeds=None, cap=None):
    monoid = as_monoid(theory)
    cap = settings.RTK_SUBSYSTEM_CAP if cap is None else cap
    found = {_completion(monoid, 0), monoid.full_mask}
    for mask in _seed_masks(monoid, seeds):
        found.add(_completion(monoid, mask))
        if len(found) > cap:
            raise CapExceeded(len(found), cap)
    frontier = set(found)
    while frontier:
        fresh = set()
        for a in frontier:
            for b in found | fresh:
                for candidate in (_completion(monoid, a | b), a & b):
                    if candidate not in found and candidate not in fresh:
                        fresh.add(candidate)
                        if len(found) + len(fresh) > cap:
                            raise CapExceeded(len(found) + len(fresh), cap)
        found |= fresh
        frontier = fresh
    nodes = tuple(
        Subsystem(monoid, mask) for mask in sorted(found, key=lambda m: (popcount(m), m))
    )
    logger.debug(f"found {len(nodes)} complete subsystems in a monoid of {len(monoid)}")
    return SubsystemLattice(monoid, nodes)


def check_lattice_laws(lattice):
    report = CheckReport("subsystem lattice")
    n = len(lattice.nodes)
    monoid = lattice.parent
    report.require(lattice.bottom.mask == _commutant_mask(monoid, monoid.full_mask), "bottom is not the centre")
    report.require(lattice.top.mask == monoid.full_mask, "top is not the whole monoid")
    joins = [[lattice.join(i, j) for j in range(n)] for i in range(n)]
    meets = [[lattice.meet(i, j) for j in range(n)] for i in range(n)]
    bottom, top = 0, n - 1
    for i in range(n):
        report.require(joins[i][bottom] == i and meets[i][top] == i, f"bound laws fail at node {i}")
        report.require(joins[i][i] == i and meets[i][i] == i, f"idempotence fails at node {i}")
        report.require(lattice.bottom.issubset(lattice.nodes[i]), f"node {i} misses the centre")
        for j in range(n):
            report.require(joins[i][j] == joins[j][i], f"join is not commutative at {i},{j}")
            report.require(meets[i][j] == meets[j][i], f"meet is not commutative at {i},{j}")
            report.require(joins[i][meets[i][j]] == i, f"absorption fails at {i},{j}")
            report.require(meets[i][joins[i][j]] == i, f"absorption fails at {i},{j}")
            for k in range(n):
                if joins[joins[i][j]][k] != joins[i][joins[j][k]]:
                    report.fail(f"join is not associative at {i},{j},{k}")
                if meets[meets[i][j]][k] != meets[i][meets[j][k]]:
                    report.fail(f"meet is not associative at {i},{j},{k}")
    return report


def check_commutant_properties(theory, a, b):
    """The commutant laws on two subsets of the monoid."""
    monoid = as_monoid(theory)
    mask_a, mask_b = _mask(monoid, a), _mask(monoid, b)
    comm = lambda m: _commutant_mask(monoid, m)  # noqa: E731
    subset = lambda x, y: x & ~y == 0  # noqa: E731
    report = CheckReport("commutant properties")
    report.require(subset(mask_a, comm(comm(mask_a))), "A is not inside its bicommutant")
    if subset(mask_a, mask_b):
        report.require(subset(comm(mask_b), comm(mask_a)), "commutant is not antitone")
    report.require(comm(comm(comm(mask_a))) == comm(mask_a), "A′ is not complete")
    report.require(comm(mask_a | mask_b) == comm(mask_a) & comm(mask_b), "(A∪B)′ ≠ A′∩B′")
    report.require(subset(comm(mask_a) | comm(mask_b), comm(mask_a & mask_b)), "A′∪B′ ⊄ (A∩B)′")
    complete_a, complete_b = comm(comm(mask_a)), comm(comm(mask_b))
    both = complete_a & complete_b
    report.require(comm(comm(both)) == both, "intersection of complete sets is not complete")
    return report


def generated_lumping(theory, agent):
    """Λ_{¬A}: identifies states that some element of A cannot tell apart."""
    monoid = as_monoid(theory)
    mask = _mask(monoid, agent)
    if not monoid.is_closed(mask):
        raise NotSubmonoid("lumpings are generated by submonoids")
    lumping, _ = lumping_from_maps(monoid.maps_of(mask), space=monoid.space)
    return lumping


def check_generated_properties(theory, agent):
    """A leaves Λ_{¬A}-classes invariant and Λ_{¬A}∘f∘Λ_{¬A} = Λ_{¬A}∘f on A ∪ A′."""
    monoid = as_monoid(theory)
    mask = _mask(monoid, agent)
    lump = generated_lumping(monoid, Subsystem(monoid, mask)).map.table
    report = CheckReport("generated lumping")
    for f in monoid.maps_of(mask):
        for i, image in enumerate(lump):
            if f.image_mask(image) & ~image:
                report.fail(f"{f} leaves the class of {monoid.space.label(i)}")
                break
    for f in monoid.maps_of(mask | _commutant_mask(monoid, mask)):
        left = compose_tables(lump, compose_tables(f.table, lump))
        right = compose_tables(lump, f.table)
        report.require(left == right, f"Λ∘{f}∘Λ ≠ Λ∘{f}")
    return report


@dataclass(frozen=True)
class Agents:
    """Two independent agents derived from independent complete subsystems."""

    a: Subsystem
    b: Subsystem
    insertion_a: object
    insertion_b: object
    theory_a: ResourceTheory
    theory_b: ResourceTheory
    certificate: CheckReport


def _independence_certificate(report, insertion, other, label):
    small = insertion.small
    for f in other.elements:
        for i in range(small.size):
            image = insertion.h.image_mask(f.image_mask(insertion.e.table[i]))
            if image & ~(1 << i):
                report.fail(f"{f} moves {label}-local state {small.label(i)}")
                return


def derive_agents(theory, a, b, free_composition=False, cap=None):
    monoid = as_monoid(theory)
    a, b = _as_subsystem(monoid, a), _as_subsystem(monoid, b)
    for agent in (a, b):
        if not is_complete(monoid, agent):
            raise NotComplete(f"{agent} is not a complete subsystem")
    if not are_independent(monoid, a, b):
        raise NotIndependent(f"{a} and {b} are not independent")
    global_theory = theory if isinstance(theory, ResourceTheory) else ResourceTheory(monoid.space, monoid)

    lumping_a = generated_lumping(monoid, commutant(monoid, a))
    lumping_b = generated_lumping(monoid, commutant(monoid, b))
    insertion_a = insertion_from_lumping(lumping_a)
    insertion_b = insertion_from_lumping(lumping_b)
    theory_a = restrict_theory(global_theory, a, insertion_a, cap, name="A")
    theory_b = restrict_theory(global_theory, b, insertion_b, cap, name="B")

    certificate = CheckReport("independent agents")
    _independence_certificate(certificate, insertion_a, b, "A")
    _independence_certificate(certificate, insertion_b, a, "B")
    if free_composition:
        certificate.absorb(check_free_composition_variant(monoid, a, b))
    certificate.details.update(
        states_a=insertion_a.small.size,
        states_b=insertion_b.small.size,
        maps_a=len(theory_a.monoid),
        maps_b=len(theory_b.monoid),
    )
    return Agents(a, b, insertion_a, insertion_b, theory_a, theory_b, certificate)


def check_free_composition_variant(theory, a, b):
    """Freely composable local theories from independent transformations.

    If for all V, W there are X, f ∈ A′ and g ∈ B′ with f(V) = f(X) and
    g(W) = g(X), then Λ_A∘Λ_B and Λ_B∘Λ_A send every state to Ω, where
    Λ_A = Λ_{¬A′} and Λ_B = Λ_{¬B′}. The side condition is evaluated
    literally over all specifications.
    """
    monoid = as_monoid(theory)
    space = monoid.space
    if space.size > settings.RTK_EXHAUSTIVE_STATES:
        raise TooLarge(
            f"the side condition is checked up to {settings.RTK_EXHAUSTIVE_STATES} states"
        )
    comm_a, comm_b = commutant(monoid, a), commutant(monoid, b)
    lump_a = generated_lumping(monoid, comm_a).map.table
    lump_b = generated_lumping(monoid, comm_b).map.table

    witnesses = []
    for f, g in itertools.product(comm_a.elements, comm_b.elements):
        pairs = {(f.image_mask(x), g.image_mask(x)) for x in space.masks()}
        witnesses.append((f, g, pairs))
    side_condition = all(
        any((f.image_mask(v), g.image_mask(w)) in pairs for f, g, pairs in witnesses)
        for v in space.masks()
        for w in space.masks()
    )
    composable = all(
        union_of(lump_a, lump_b[i]) == space.full_mask
        and union_of(lump_b, lump_a[i]) == space.full_mask
        for i in range(space.size)
    )
    report = CheckReport(
        "free composition",
        details={"side_condition": side_condition, "freely_composable": composable},
    )
    if side_condition and not composable:
        report.fail("the side condition holds but the local descriptions do not compose freely")
    return report


def _limit():
    return 2 * settings.RTK_EXHAUSTIVE_STATES


def check_compatibility(insertion_a, insertion_b):
    """Evaluate the three equivalent conditions for free composition of local resources."""
    same_space(insertion_a.big, insertion_b.big)
    big = insertion_a.big
    if big.size > _limit():
        raise TooLarge(f"compatibility is checked exhaustively up to {_limit()} states")
    e_a, h_a, e_b, h_b = insertion_a.e, insertion_a.h, insertion_b.e, insertion_b.h
    small_a, small_b = insertion_a.small, insertion_b.small

    mutual = all(
        h_b.image_mask(e_a.image_mask(v)) == small_b.full_mask for v in small_a.masks()
    ) and all(h_a.image_mask(e_b.image_mask(w)) == small_a.full_mask for w in small_b.masks())

    realizable_pairs = {(h_a.image_mask(z), h_b.image_mask(z)) for z in big.masks()}
    realizable = all((v, w) in realizable_pairs for v in small_a.masks() for w in small_b.masks())

    composable = True
    for v in small_a.masks():
        embedded = e_a.image_mask(v)
        for w in small_b.masks():
            joint = embedded & e_b.image_mask(w)
            if not joint or h_a.image_mask(joint) != v:
                composable = False
                break
        if not composable:
            break

    verdicts = {"compatible": mutual, "realizable": realizable, "composable": composable}
    if len(set(verdicts.values())) != 1:
        raise InternalInconsistency(f"free composition conditions disagree: {verdicts}")
    report = CheckReport("compatibility", passed=mutual, details=verdicts)
    if not mutual:
        report.failures.append("local specifications cannot be freely composed")
    return report


def check_independent_processing(insertion_a, f_b, v_a, w):
    """f_B(e_A(V_A) ∩ W) = e_A(V_A) ∩ f_B(W) for an embedding independent of f_B."""
    same_space(f_b.source, insertion_a.big)
    same_space(v_a.space, insertion_a.small)
    same_space(w.space, insertion_a.big)
    e, h = insertion_a.e, insertion_a.h
    for i, image in enumerate(e.table):
        if h.image_mask(f_b.image_mask(image)) & ~(1 << i):
            raise NotIndependent(
                f"{f_b} changes the local state {insertion_a.small.label(i)}"
            )
    local = e.image_mask(v_a.mask)
    if not local & w.mask:
        raise IncompatibleW(f"{w} is not compatible with e({v_a})")
    left = f_b.image_mask(local & w.mask)
    right = local & f_b.image_mask(w.mask)
    report = CheckReport("independent processing", details={"left": left, "right": right})
    if left != right:
        witness = next(iter_bits(left ^ right))
        report.fail(f"sides differ at {insertion_a.big.label(witness)}")
    return report


def _local_image(insertion, f, mask):
    reduced = insertion.h.image_mask(mask)
    local = insertion.h.image_mask(f.image_mask(insertion.e.image_mask(reduced)))
    return insertion.e.image_mask(local)


def check_agents_theorem(agents, f_a, g_b, v):
    """f_A∘g_B(V) ⊆ e_A(f̃_A(h_A(V))) ∩ e_B(g̃_B(h_B(V))), in both orders."""
    if f_a not in agents.a or g_b not in agents.b:
        raise NotInMonoid("the maps must belong to the two agents")
    bound = _local_image(agents.insertion_a, f_a, v.mask) & _local_image(
        agents.insertion_b, g_b, v.mask
    )
    report = CheckReport("independent agents theorem")
    for first, second in ((f_a, g_b), (g_b, f_a)):
        reached = first.image_mask(second.image_mask(v.mask))
        report.require(reached & ~bound == 0, f"{first}∘{second} leaves the local bound on {v}")
    return report


def certify_agents_theorem(agents):
    report = CheckReport("independent agents theorem")
    space = agents.a.space
    for f_a, g_b in itertools.product(agents.a.elements, agents.b.elements):
        for mask in space.masks():
            report.absorb(check_agents_theorem(agents, f_a, g_b, Specification(space, mask)))
            if not report:
                return report
    return report


def inherited_subsystems(theory, outer, lattice=None):
    """{A ∩ T : A complete in M}, deduplicated, as submonoids of T."""
    inner, outer = as_monoid(theory), as_monoid(outer)
    for f in inner:
        if f not in outer:
            raise NotSubtheory(f"{f} is not an element of the larger theory")
    lattice = lattice or enumerate_complete(outer)
    found = {}
    for node in lattice.nodes:
        shared = [f for f in node.elements if f in inner]
        mask = inner.mask_of(shared)
        if not inner.is_closed(mask):
            raise InternalInconsistency("an intersection of monoids is not a monoid")
        found.setdefault(mask, Subsystem(inner, mask))
    return [found[mask] for mask in sorted(found, key=lambda m: (popcount(m), m))]


@dataclass(frozen=True)
class SwapPair:
    """An invertible u conjugating subsystem A onto an identical subsystem B."""

    u: SpecMap
    u_inv: SpecMap
    a: Subsystem
    b: Subsystem
    iso: tuple
    source: object
    target: object

    @classmethod
    def build(cls, theory, a, b, iso, u, u_inv):
        monoid = as_monoid(theory)
        a, b = _as_subsystem(monoid, a), _as_subsystem(monoid, b)
        pairs = tuple((monoid.find(f), monoid.find(g)) for f, g in _iso_pairs(iso))
        source = insertion_from_lumping(generated_lumping(monoid, commutant(monoid, a)))
        target = insertion_from_lumping(generated_lumping(monoid, commutant(monoid, b)))
        return cls(monoid.find(u), monoid.find(u_inv), a, b, pairs, source, target)

    @classmethod
    def trivial(cls, theory, a):
        monoid = as_monoid(theory)
        identity = monoid.identity
        a = _as_subsystem(monoid, a)
        return cls.build(monoid, a, a, [(f, f) for f in a.elements], identity, identity)

    def conjugate(self, table):
        return compose_tables(self.u_inv.table, compose_tables(table, self.u.table))

    def conjugated_lumping(self):
        """u⁻¹∘Λ_{¬A}∘u as a raw table."""
        return self.conjugate(generated_lumping(self.a.parent, self.a).map.table)


def _iso_pairs(iso):
    return list(iso.items()) if isinstance(iso, dict) else list(iso)


def extend_iso(theory, pairs):
    """Extend an assignment on generators to the submonoids they generate.

    The identity is paired with itself; products are paired with products.
    Raises NotIsomorphism if two products of the same element disagree.
    """
    monoid = as_monoid(theory)
    forward = {monoid.identity_index: monoid.identity_index}
    generators = []
    for f, g in _iso_pairs(pairs):
        i, j = monoid.index_of(f), monoid.index_of(g)
        if forward.setdefault(i, j) != j:
            raise NotIsomorphism(f"{f} is paired with two different maps")
        generators.append((i, j))
    queue = list(forward.items())
    while queue:
        i, j = queue.pop()
        for gi, gj in generators:
            product, image = monoid.product_index(gi, i), monoid.product_index(gj, j)
            if product not in forward:
                forward[product] = image
                queue.append((product, image))
            elif forward[product] != image:
                raise NotIsomorphism(f"{monoid.elements[product]} has two images")
    return [(monoid.elements[i], monoid.elements[j]) for i, j in sorted(forward.items())]


def verify_swap(theory, a, b, iso, u, u_inv):
    monoid = as_monoid(theory)
    swap = SwapPair.build(monoid, a, b, iso, u, u_inv)
    a, b = swap.a, swap.b
    forward = {monoid.index_of(f): monoid.index_of(g) for f, g in swap.iso}
    backward = {g: f for f, g in forward.items()}
    if (
        set(forward) != set(iter_bits(a.mask))
        or set(backward) != set(iter_bits(b.mask))
        or len(backward) != len(forward)
    ):
        raise NotIsomorphism("iso is not a bijection between the two subsystems")
    for i, j in itertools.product(forward, repeat=2):
        if forward[monoid.product_index(i, j)] != monoid.product_index(forward[i], forward[j]):
            raise NotIsomorphism("iso does not preserve composition")
    if forward.get(monoid.identity_index) != monoid.identity_index:
        raise NotIsomorphism("iso does not fix the identity")

    report = CheckReport("swap")
    report.require(is_complete(monoid, a) and is_complete(monoid, b), "subsystems are not complete")
    report.require(are_independent(monoid, a, b), "subsystems are not independent")
    joined = join(a, b)
    for label, f in (("u", swap.u), ("u_inv", swap.u_inv)):
        if f not in joined:
            raise NotInJoin(f"{label} is not in the join of the two subsystems")

    identity = monoid.identity.table
    report.require(
        compose_tables(swap.u.table, swap.u_inv.table) == identity
        and compose_tables(swap.u_inv.table, swap.u.table) == identity,
        "u is not invertible",
    )
    for i, j in itertools.product(forward, backward):
        f_a, g_b = monoid.elements[i], monoid.elements[j]
        local = compose_tables(f_a.table, g_b.table)
        expected = compose_tables(monoid.elements[forward[i]].table, monoid.elements[backward[j]].table)
        if swap.conjugate(local) != expected or compose_tables(
            swap.u.table, compose_tables(local, swap.u_inv.table)
        ) != expected:
            report.fail(f"conjugating {f_a}∘{g_b} does not exchange the subsystems")
            break
    lump_b = generated_lumping(monoid, b).map.table
    report.require(swap.conjugated_lumping() == lump_b, "u⁻¹∘Λ_A∘u ≠ Λ_B")
    report.details["pairs"] = len(forward) * len(backward)
    return report


def copy_spec(swap, v):
    """u(e_A(V_A)): the copy of a local specification of A, local in B."""
    source, target = swap.source, swap.target
    if v.space == source.small:
        embedded = source.e.image_mask(v.mask)
    else:
        same_space(v.space, source.big)
        if source.lumping_map.image_mask(v.mask) != v.mask:
            raise NotLocal(f"{v} is not local in the source subsystem")
        embedded = v.mask
    copied = swap.u.image_mask(embedded)
    if target.lumping_map.image_mask(copied) != copied:
        raise InternalInconsistency("the copy is not local in the target subsystem")
    return Specification(source.big, copied)


def n_copies(v, swaps, space=None):
    """Intersection of the copies of V under each swap; zero copies is Ω.

    The swap targets must be pairwise distinct and independent. With no swaps
    the global space cannot be read off V, so it has to be passed in.
    """
    swaps = list(swaps)
    if not swaps:
        if space is None:
            raise TypeError("n_copies needs the global space when no swaps are given")
        return space.full()
    first = swaps[0]
    for swap in swaps[1:]:
        if swap.a != first.a:
            raise NotLocal("all swaps must start from the same subsystem")
    targets = [swap.b for swap in swaps]
    for x, y in itertools.combinations(range(len(targets)), 2):
        if targets[x] == targets[y]:
            raise NotIndependent(f"copy targets {x} and {y} are the same subsystem")
        if not are_independent(first.a.parent, targets[x], targets[y]):
            raise NotIndependent(f"copy targets {x} and {y} are not independent")
    result = first.source.big.full_mask
    for k, swap in enumerate(swaps):
        copied = copy_spec(swap, v).mask
        if not result & copied:
            raise Incompatible(f"copy {k} contradicts the earlier copies", clash=k)
        result &= copied
    return Specification(first.source.big, result)
