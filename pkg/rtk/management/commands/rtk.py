"""The ``rtk`` command: one verb per engine operation.

Every verb prints human-readable lines followed by a JSON report between two
``---`` lines. Exit codes: 0 positive verdict, 1 negative verdict, 2 input
error, 3 monoid or subsystem cap exceeded.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from io import StringIO

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import BaseCommand, CommandError, CommandParser
from django.core.serializers.json import DjangoJSONEncoder

from rtk.engine import approx, convex, embed, locality, oracle, theory as core
from rtk.engine.laws import all_suites
from rtk.engine.reports import CheckReport
from rtk.engine.spec_core import SpecMap, Specification, StateSpace
from rtk.exceptions import CapExceeded, InternalInconsistency, NotIndependent, RtkError
from rtk.io.dot import covering_pairs, lattice_dot, quotient_dot
from rtk.io.theory_file import load_theory

logger = logging.getLogger(__name__)

EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_CAP = 3


class ReportEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, CheckReport):
            return o.as_dict()
        if isinstance(o, (Fraction, Specification, SpecMap, StateSpace)):
            return str(o)
        if isinstance(o, (convex.RationalPoint, convex.PointSpec, convex.AffineMap)):
            return str(o)
        if isinstance(o, locality.Subsystem):
            return [str(f) for f in o.elements]
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


class VerbParser(CommandParser):
    """Usage errors are input errors, whichever way the command was called."""

    def error(self, message):
        if self.called_from_command_line:
            super().error(message)
        raise CommandError(f"Error: {message}", returncode=EXIT_INPUT)


@dataclass
class Outcome:
    lines: list = field(default_factory=list)
    report: dict = field(default_factory=dict)
    ok: bool = True


def _names(maps):
    return [str(f) for f in maps]


def _iso_tokens(model, tokens):
    pairs = []
    for token in tokens:
        left, sep, right = token.partition("=")
        if not sep:
            raise ValueError(f"iso entries look like f=g, got {token!r}")
        pairs.append((model.map(left), model.map(right)))
    return pairs


def run_command(argv, stdout=None):
    """Run ``rtk`` with argv and return (exit code, captured stdout)."""
    out = stdout or StringIO()
    try:
        call_command("rtk", *argv, stdout=out)
        code = 0
    except CommandError as exc:
        code = exc.returncode
    return code, out.getvalue() if isinstance(out, StringIO) else None


class Command(BaseCommand):
    help = "Finite resource theories: reachability, embeddings, locality, approximations and convexity"
    requires_system_checks = []

    def add_arguments(self, parser):
        verbs = parser.add_subparsers(dest="verb", required=True, metavar="verb", parser_class=VerbParser)
        from_command_line = getattr(parser, "called_from_command_line", None)

        def verb(name, help_text, with_file=True, with_oracle=False):
            sub = verbs.add_parser(name, help=help_text, called_from_command_line=from_command_line)
            if with_file:
                sub.add_argument("file", help="theory file")
            sub.add_argument("--seed", type=int, default=None, help="seed for sampled checks")
            if with_oracle:
                sub.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
            return sub

        verb("check", "parse a theory file and verify everything it declares")

        sub = verb("reach", "is --to reachable from --from", with_oracle=True)
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--from", dest="source", required=True)
        sub.add_argument("--to", dest="target", required=True)

        sub = verb("free", "is a specification reachable from Ω", with_oracle=True)
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--spec", required=True)

        sub = verb("quotient", "mutual convertibility classes", with_oracle=True)
        sub.add_argument("--monoid", required=True)
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--spec", action="append")
        group.add_argument("--all-specs", action="store_true")
        sub.add_argument("--dot")

        sub = verb("conserved", "is a specification left unchanged by every map")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--spec", required=True)

        sub = verb("combine", "maps shared by two theories")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--with", dest="other", required=True)

        sub = verb("lumping", "a lumping and the insertion it induces")
        sub.add_argument("--lumping", required=True)
        sub.add_argument("--spec")

        sub = verb("embed", "classify a specification embedding")
        sub.add_argument("--map", required=True)

        sub = verb("decompose", "factor an embedding into extensive and intensive parts")
        sub.add_argument("--map", required=True)
        sub.add_argument("--int-ext", action="store_true", help="intensive after extensive")

        sub = verb("nest", "nest two intensive embeddings")
        sub.add_argument("--first", required=True)
        sub.add_argument("--second", required=True)
        sub.add_argument("--middle", action="store_true")

        sub = verb("restrict", "restricted agent theory on the reduced space")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--agent", required=True)
        sub.add_argument("--lumping", required=True)

        sub = verb("effective", "effective theory induced by a side resource")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--agent", required=True)
        sub.add_argument("--lumping", required=True)
        sub.add_argument("--side", required=True)

        for name in ("commutant", "bicommutant"):
            sub = verb(name, f"{name} of an agent", with_oracle=True)
            sub.add_argument("--monoid", required=True)
            sub.add_argument("--agent", required=True)

        sub = verb("subsystems", "lattice of complete subsystems")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--seeds", nargs="+")
        sub.add_argument("--inherit", help="monoid whose inherited subsystems are listed")
        sub.add_argument("--dot")

        sub = verb("independence", "derive two independent agents")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--a", required=True)
        sub.add_argument("--b", required=True)
        sub.add_argument("--free-composition", action="store_true")

        sub = verb("compatibility", "free composition of two lumpings")
        sub.add_argument("--first", required=True)
        sub.add_argument("--second", required=True)

        for name, help_text in (("swap", "verify a swap between two subsystems"), ("copies", "copies of a local specification")):
            sub = verb(name, help_text)
            sub.add_argument("--monoid", required=True)
            sub.add_argument("--a", required=True)
            sub.add_argument("--b", required=True)
            sub.add_argument("--u", required=True)
            sub.add_argument("--u-inv", required=True)
            sub.add_argument("--iso", nargs="+", required=True, help="generator pairs f=g")
            if name == "copies":
                sub.add_argument("--spec", required=True)
                sub.add_argument("--count", type=int, required=True)

        sub = verb("approx-verify", "verify an approximation structure")
        sub.add_argument("--approx", required=True)

        sub = verb("approx-robust", "is a specification ε-robust")
        sub.add_argument("--monoid", required=True)
        sub.add_argument("--approx", required=True)
        sub.add_argument("--spec", required=True)
        sub.add_argument("--eps", required=True)

        sub = verb("approx-reduce", "reduce an approximation structure through a lumping")
        sub.add_argument("--approx", required=True)
        sub.add_argument("--lumping", required=True)

        sub = verb("hull", "convex hull membership", with_oracle=True)
        sub.add_argument("--points", required=True)
        sub.add_argument("--point", required=True)

        sub = verb("extreme", "extreme points of a point set")
        sub.add_argument("--points", required=True)

        sub = verb("prob-equiv", "probabilistic equivalence of two point sets")
        sub.add_argument("--points", required=True)
        sub.add_argument("--other", required=True)

        sub = verb("convexity", "convexity preservation and double convexity of affine maps")
        sub.add_argument("--affine", nargs="+", required=True)
        sub.add_argument("--points", required=True)
        sub.add_argument("--other")
        sub.add_argument("--p", nargs="+", default=["1/2"])

        sub = verb("laws", "run the seeded property suites", with_file=False, with_oracle=True)
        sub.add_argument("--scale", type=int, default=1, help="divide every instance count by this")

    def handle(self, *args, **options):
        verb = options["verb"]
        if options["seed"] is None:
            options["seed"] = settings.RTK_DEFAULT_SEED
        logger.info(f"rtk {verb} started")
        handler = getattr(self, "verb_" + verb.replace("-", "_"))
        try:
            model = load_theory(options["file"]) if options.get("file") else None
            outcome = handler(model, options)
        except CapExceeded as exc:
            logger.error(f"rtk {verb}: {exc}")
            raise CommandError(str(exc), returncode=EXIT_CAP) from exc
        except (RtkError, OSError, ValueError) as exc:
            logger.error(f"rtk {verb}: {exc}")
            raise CommandError(str(exc), returncode=EXIT_INPUT) from exc

        report = {"verb": verb, "seed": options["seed"], "verdict": outcome.ok, **outcome.report}
        for line in outcome.lines:
            self.stdout.write(line)
        self.stdout.write("---")
        self.stdout.write(json.dumps(report, cls=ReportEncoder, sort_keys=True, indent=2, ensure_ascii=False))
        self.stdout.write("---")
        logger.info(f"rtk {verb} finished, verdict {outcome.ok}")
        if not outcome.ok:
            raise CommandError(f"{verb}: negative verdict", returncode=EXIT_NEGATIVE)

    def _agent(self, model, theory, name):
        return locality.subsystem(theory, model.theory(name).elements, name)

    def _write_dot(self, path, text, outcome):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        outcome.lines.append(f"wrote {path}")
        outcome.report["dot"] = path

    # theories

    def verb_check(self, model, options):
        outcome = Outcome()
        outcome.lines.append(f"states: {' '.join(model.states.labels)}")
        sizes, checks = {}, {}
        for name in model.monoids:
            sizes[name] = len(model.theory(name).monoid)
            outcome.lines.append(f"monoid {name}: {sizes[name]} elements")
        for name in model.lumpings:
            lumping = model.lumping(name)
            if lumping.is_partition():
                insertion = embed.insertion_from_lumping(lumping)
                checks[f"lumping {name}"] = embed.verify_insertion(insertion, seed=options["seed"])
                outcome.lines.append(f"lumping {name}: {insertion.small.size} classes")
            else:
                outcome.lines.append(f"lumping {name}: overlapping classes")
        for name in model.approximations:
            checks[f"approx {name}"] = approx.verify_structure(model.structure(name))
        for label, report in checks.items():
            outcome.lines.append(f"{label}: {'ok' if report else report.first_failure}")
        outcome.ok = all(checks.values())
        outcome.report.update(
            states=list(model.states.labels),
            maps=sorted(model.maps),
            monoids=sizes,
            checks=checks,
            points=sorted(model.points),
            affine=sorted(model.affine),
        )
        return outcome

    def verb_reach(self, model, options):
        theory = model.theory(options["monoid"])
        v, w = model.spec(options["source"]), model.spec(options["target"])
        witness = core.reaches(theory, v, w)
        outcome = Outcome(ok=witness.found)
        outcome.report.update({"from": v, "to": w, "reachable": witness.found, "witness": witness.map})
        if witness:
            outcome.lines.append(f"{v} -> {w} via {witness.map}")
        else:
            outcome.lines.append(f"{v} does not reach {w}")
        if options["oracle"]:
            expected = oracle.oracle_reaches(theory, v, w).found
            if expected != witness.found:
                raise InternalInconsistency(f"oracle says {expected} for {v} -> {w}")
            outcome.report["oracle"] = expected
        return outcome

    def verb_free(self, model, options):
        theory = model.theory(options["monoid"])
        v = model.spec(options["spec"])
        witness = core.reaches(theory, theory.space.full(), v)
        outcome = Outcome(ok=witness.found)
        constants = [{"map": f, "image": image} for f, image in core.resource_independent_maps(theory)]
        outcome.report.update(spec=v, free=witness.found, witness=witness.map, resource_independent=constants)
        outcome.lines.append(f"{v} is free via {witness.map}" if witness else f"{v} is not free")
        if options["oracle"]:
            expected = oracle.oracle_reaches(theory, theory.space.full(), v).found
            if expected != witness.found:
                raise InternalInconsistency(f"oracle says {expected} for freeness of {v}")
            outcome.report["oracle"] = expected
        return outcome

    def verb_quotient(self, model, options):
        theory = model.theory(options["monoid"])
        candidates = [model.spec(text) for text in options["spec"] or ()]
        result = core.quotient(theory, candidates, all_specs=options["all_specs"])
        outcome = Outcome()
        for i, members in enumerate(result.classes):
            marker = " (free)" if result.free[i] else ""
            outcome.lines.append(f"class {i}{marker}: " + " | ".join(str(v) for v in members))
        covers = covering_pairs(len(result.classes), result.order)
        outcome.lines += [f"{i} -> {j}" for i, j in covers]
        outcome.report.update(
            classes=[list(members) for members in result.classes],
            order=sorted(result.order),
            top=result.top,
            free=list(result.free),
        )
        if options["oracle"]:
            for i, a in enumerate(result.classes):
                for j, b in enumerate(result.classes):
                    if oracle.oracle_reaches(theory, a[0], b[0]).found != result.reaches(i, j):
                        raise InternalInconsistency(f"oracle disagrees on classes {i} and {j}")
            outcome.report["oracle"] = True
        if options["dot"]:
            self._write_dot(options["dot"], quotient_dot(result), outcome)
        return outcome

    def verb_conserved(self, model, options):
        theory = model.theory(options["monoid"])
        v = model.spec(options["spec"])
        conserved = core.is_conserved(theory, v)
        outcome = Outcome(ok=conserved)
        outcome.lines.append(f"{v} is {'conserved' if conserved else 'not conserved'}")
        outcome.report.update(spec=v, conserved=conserved)
        return outcome

    def verb_combine(self, model, options):
        first, second = model.theory(options["monoid"]), model.theory(options["other"])
        combined = core.combine_theories(first, second, f"{options['monoid']}&{options['other']}")
        outcome = Outcome()
        outcome.lines.append(f"{combined.name}: {len(combined.monoid)} shared elements")
        outcome.lines += [f"  {f}" for f in combined.elements]
        outcome.report.update(theory=combined.name, elements=_names(combined.elements))
        return outcome

    # embeddings

    def verb_lumping(self, model, options):
        lumping = model.lumping(options["lumping"])
        space = lumping.space
        classes = [str(Specification(space, mask)) for mask in lumping.classes()]
        outcome = Outcome(ok=lumping.is_partition())
        outcome.lines.append(f"{lumping.name}: {' '.join(classes)}")
        outcome.report.update(lumping=lumping.name, classes=classes, partition=lumping.is_partition())
        insertion = None
        if lumping.is_partition():
            insertion = embed.insertion_from_lumping(lumping)
            report = embed.verify_insertion(insertion, seed=options["seed"])
            outcome.ok = report.passed
            outcome.lines.append(f"reduced space: {insertion.small}")
            outcome.report.update(reduced=list(insertion.small.labels), insertion=report)
        else:
            outcome.lines.append("overlapping classes: no reduced space")
        if options["spec"]:
            v = model.spec(options["spec"])
            lumped = lumping.map(v)
            local = embed.is_local(lumping, v)
            outcome.lines.append(f"Λ{v} = {lumped}, {'local' if local else 'not local'}")
            outcome.report.update(spec=v, lumped=lumped, local=local)
            if insertion is not None:
                outcome.report["reduced_spec"] = insertion.reduce(v)
        return outcome

    def verb_embed(self, model, options):
        e = model.map(options["map"])
        order = embed.verify_order_embedding(e)
        outcome = Outcome(ok=order.passed)
        outcome.report["order_embedding"] = order
        if not order:
            outcome.lines.append(f"{e} is not an order embedding: {order.first_failure}")
            return outcome
        result = embed.classify_embedding(e)
        outcome.lines.append(f"{e}: {result.kind.value}")
        outcome.report["kind"] = result.kind.value
        if result.adjoint is not None:
            outcome.lines.append(f"adjoint: {result.adjoint.describe()}")
            outcome.report["adjoint"] = result.adjoint.describe()
        return outcome

    def verb_decompose(self, model, options):
        e = model.map(options["map"])
        order = "int-ext" if options["int_ext"] else "ext-int"
        parts = embed.decompose_embedding(e, order)
        composite = parts.composite()
        outcome = Outcome(ok=composite.table == e.table)
        outcome.lines += [
            f"intermediate space: {parts.gamma}",
            f"extensive: {parts.extensive.describe()}",
            f"intensive: {parts.intensive.describe()}",
        ]
        outcome.report.update(
            order=order,
            gamma=list(parts.gamma.labels),
            extensive=parts.extensive.describe(),
            intensive=parts.intensive.describe(),
            kinds={
                "extensive": embed.classify_embedding(parts.extensive).kind.value,
                "intensive": embed.classify_embedding(parts.intensive).kind.value,
            },
        )
        return outcome

    def verb_nest(self, model, options):
        direction = "middle" if options["middle"] else "compose"
        result = embed.nest(model.map(options["first"]), model.map(options["second"]), direction)
        outcome = Outcome()
        outcome.lines += [
            f"{result.small} into {result.big}",
            f"e: {result.e.describe()}",
            f"h: {result.h.describe()}",
        ]
        outcome.report.update(
            direction=direction,
            small=list(result.small.labels),
            big=list(result.big.labels),
            e=result.e.describe(),
            h=result.h.describe(),
        )
        return outcome

    def _reduced_theory(self, reduced, outcome):
        outcome.lines.append(f"{reduced.name}: {len(reduced.monoid)} maps on {reduced.space}")
        outcome.lines += [f"  {f.describe()}" for f in reduced.elements]
        outcome.report.update(
            space=list(reduced.space.labels), maps=[f.describe() for f in reduced.elements]
        )
        return outcome

    def verb_restrict(self, model, options):
        theory = model.theory(options["monoid"])
        agent = self._agent(model, theory, options["agent"])
        insertion = embed.insertion_from_lumping(model.lumping(options["lumping"]))
        reduced = embed.restrict_theory(theory, agent, insertion, name=f"{agent}|{options['lumping']}")
        return self._reduced_theory(reduced, Outcome())

    def verb_effective(self, model, options):
        theory = model.theory(options["monoid"])
        agent = self._agent(model, theory, options["agent"])
        insertion = embed.insertion_from_lumping(model.lumping(options["lumping"]))
        side = model.spec(options["side"])
        reduced = embed.effective_theory(theory, agent, insertion, side, name=f"{agent}|{side}")
        outcome = Outcome()
        outcome.report["side"] = side
        return self._reduced_theory(reduced, outcome)

    # locality

    def _commutant_verb(self, model, options, twice):
        theory = model.theory(options["monoid"])
        agent = self._agent(model, theory, options["agent"])
        result = locality.bicommutant(theory, agent) if twice else locality.commutant(theory, agent)
        complete = locality.is_complete(theory, agent)
        outcome = Outcome()
        outcome.lines.append(f"{len(result)} elements, agent {'complete' if complete else 'not complete'}")
        outcome.lines += [f"  {f}" for f in result.elements]
        outcome.report.update(agent=agent.name, elements=_names(result.elements), complete=complete)
        if options["oracle"]:
            expected = oracle.oracle_commutant(theory, agent)
            if twice:
                expected = oracle.oracle_commutant(theory, expected)
            if {f.table for f in expected} != {f.table for f in result.elements}:
                raise InternalInconsistency("the commutant oracle disagrees")
            outcome.report["oracle"] = True
        return outcome

    def verb_commutant(self, model, options):
        return self._commutant_verb(model, options, twice=False)

    def verb_bicommutant(self, model, options):
        return self._commutant_verb(model, options, twice=True)

    def verb_subsystems(self, model, options):
        theory = model.theory(options["monoid"])
        seeds = [model.theory(name).elements for name in options["seeds"]] if options["seeds"] else None
        lattice = locality.enumerate_complete(theory, seeds)
        laws = locality.check_lattice_laws(lattice)
        outcome = Outcome(ok=laws.passed)
        for i, node in enumerate(lattice.nodes):
            outcome.lines.append(f"node {i}: {len(node)} elements")
        covers = covering_pairs(len(lattice.nodes), lattice.order())
        outcome.lines += [f"{i} -> {j}" for i, j in covers]
        outcome.report.update(nodes=list(lattice.nodes), covers=covers, laws=laws)
        if options["inherit"]:
            inner = model.theory(options["inherit"])
            inherited = locality.inherited_subsystems(inner, theory, lattice)
            outcome.lines.append(f"{options['inherit']} inherits {len(inherited)} subsystems")
            outcome.report["inherited"] = inherited
        if options["dot"]:
            self._write_dot(options["dot"], lattice_dot(lattice), outcome)
        return outcome

    def verb_independence(self, model, options):
        theory = model.theory(options["monoid"])
        a = self._agent(model, theory, options["a"])
        b = self._agent(model, theory, options["b"])
        facts = {
            "complete_a": locality.is_complete(theory, a),
            "complete_b": locality.is_complete(theory, b),
            "independent": locality.are_independent(theory, a, b),
        }
        outcome = Outcome(report=dict(facts))
        outcome.report["commutant_laws"] = locality.check_commutant_properties(theory, a, b)
        outcome.report["centreless_intersection"] = locality.check_centreless_intersection(theory, a, b)
        if not all(facts.values()):
            outcome.ok = False
            outcome.lines.append("the agents are not independent complete subsystems")
            return outcome
        agents = locality.derive_agents(theory, a, b, free_composition=options["free_composition"])
        theorem = locality.certify_agents_theorem(agents)
        for label, reduced in (("A", agents.theory_a), ("B", agents.theory_b)):
            outcome.lines.append(f"agent {label}: {len(reduced.monoid)} maps on {reduced.space}")
        outcome.lines.append(f"certificate: {'ok' if agents.certificate else agents.certificate.first_failure}")
        outcome.ok = agents.certificate.passed and theorem.passed
        outcome.report.update(
            certificate=agents.certificate,
            theorem=theorem,
            space_a=list(agents.theory_a.space.labels),
            space_b=list(agents.theory_b.space.labels),
            maps_a=[f.describe() for f in agents.theory_a.elements],
            maps_b=[f.describe() for f in agents.theory_b.elements],
        )
        return outcome

    def verb_compatibility(self, model, options):
        first = embed.insertion_from_lumping(model.lumping(options["first"]))
        second = embed.insertion_from_lumping(model.lumping(options["second"]))
        report = locality.check_compatibility(first, second)
        outcome = Outcome(ok=report.passed, report={"compatibility": report})
        outcome.lines.append(
            "freely composable" if report else "not freely composable"
        )
        return outcome

    def _swap(self, model, options):
        theory = model.theory(options["monoid"])
        a = self._agent(model, theory, options["a"])
        b = self._agent(model, theory, options["b"])
        iso = locality.extend_iso(theory, _iso_tokens(model, options["iso"]))
        u, u_inv = model.map(options["u"]), model.map(options["u_inv"])
        report = locality.verify_swap(theory, a, b, iso, u, u_inv)
        return theory, a, b, iso, u, u_inv, report

    def verb_swap(self, model, options):
        *_, report = self._swap(model, options)
        outcome = Outcome(ok=report.passed, report={"swap": report})
        outcome.lines.append(f"swap: {'ok' if report else report.first_failure}")
        return outcome

    def verb_copies(self, model, options):
        theory, a, b, iso, u, u_inv, report = self._swap(model, options)
        v = model.spec(options["spec"])
        count = options["count"]
        if count < 0:
            raise ValueError("--count must be nonnegative")
        # the subsystem itself plus one swap target
        if count > 2:
            raise NotIndependent(f"one swap gives at most 2 independent copies, got --count {count}")
        outcome = Outcome(ok=report.passed, report={"swap": report, "spec": v, "count": count})
        if not report:
            outcome.lines.append(f"swap: {report.first_failure}")
            return outcome
        supports = [
            locality.SwapPair.trivial(theory, a),
            locality.SwapPair.build(theory, a, b, iso, u, u_inv),
        ][:count]
        copies = locality.n_copies(v, supports, theory.space)
        outcome.lines.append(f"{count} copies of {v}: {copies}")
        outcome.report["copies"] = copies
        return outcome

    # approximations

    def verb_approx_verify(self, model, options):
        s = model.structure(options["approx"])
        report = approx.verify_structure(s)
        outcome = Outcome(ok=report.passed, report={"structure": report})
        outcome.lines.append(f"{s.name}: {'ok' if report else report.first_failure}")
        if s.index.chains:
            triangle = approx.check_triangle(s, seed=options["seed"])
            outcome.ok = outcome.ok and triangle.passed
            outcome.report["triangle"] = triangle
            outcome.lines.append(f"triangle: {'ok' if triangle else triangle.first_failure}")
        outcome.report["approximation_space"] = approx.approximation_space(s)
        return outcome

    def verb_approx_robust(self, model, options):
        theory = model.theory(options["monoid"])
        s = model.structure(options["approx"])
        v, eps = model.spec(options["spec"]), options["eps"]
        robust = approx.is_robust(theory, s, v, eps)
        stable = approx.is_stable(theory, s)
        outcome = Outcome(ok=robust)
        outcome.lines.append(f"{v} is {'' if robust else 'not '}{eps}-robust")
        outcome.report.update(
            spec=v, eps=eps, robust=robust, approximation=approx.approximate(s, v, eps), stable=stable
        )
        return outcome

    def verb_approx_reduce(self, model, options):
        s = model.structure(options["approx"])
        insertion = embed.insertion_from_lumping(model.lumping(options["lumping"]))
        reduced = approx.reduce_structure(s, insertion)
        report = approx.verify_structure(reduced)
        outcome = Outcome(ok=report.passed)
        for eps in reduced.index.elements:
            outcome.lines.append(f"{eps}: {reduced.family[eps].describe()}")
        outcome.report.update(
            structure=report,
            levels={eps: reduced.family[eps].describe() for eps in reduced.index.elements},
            preserves=approx.preserves_structure(s, insertion),
            collapsed=approx.collapsed_levels(s, reduced),
        )
        if s.index.chains:
            outcome.report["triangle"] = approx.check_reduced_triangle(s, insertion)
        return outcome

    # convexity

    def verb_hull(self, model, options):
        v = model.point_spec(options["points"])
        x = convex.RationalPoint.parse(options["point"])
        inside = convex.hull_contains(v, x)
        outcome = Outcome(ok=inside, report={"points": v, "point": x, "inside": inside})
        outcome.lines.append(f"({x}) is {'inside' if inside else 'outside'} the hull of {v}")
        if options["oracle"]:
            expected = oracle.oracle_hull_contains(v, x)
            if expected != inside:
                raise InternalInconsistency(f"hull oracle says {expected} for ({x})")
            outcome.report["oracle"] = expected
        return outcome

    def verb_extreme(self, model, options):
        v = model.point_spec(options["points"])
        extremes = convex.extreme_points(v)
        outcome = Outcome(report={"points": v, "extreme": extremes})
        outcome.lines.append(f"extreme points: {extremes}")
        return outcome

    def verb_prob_equiv(self, model, options):
        v, w = model.point_spec(options["points"]), model.point_spec(options["other"])
        equivalent = convex.prob_equivalent(v, w)
        outcome = Outcome(ok=equivalent, report={"equivalent": equivalent})
        outcome.lines.append(f"{v} {'~' if equivalent else '!~'} {w}")
        return outcome

    def verb_convexity(self, model, options):
        maps = [model.affine_map(name) for name in options["affine"]]
        v = model.point_spec(options["points"])
        w = model.point_spec(options["other"]) if options["other"] else v
        ps = [convex.probability(convex.parse_rational(p)) for p in options["p"]]
        checks = {str(g): convex.check_convexity_preserving(g, v, w, ps) for g in maps}
        if all(g.in_dim == g.out_dim == v.dim for g in maps):
            checks["doubly convex"] = convex.check_doubly_convex(maps, v, ps)
        outcome = Outcome(ok=all(checks.values()), report={"checks": checks, "p": ps})
        for label, report in checks.items():
            outcome.lines.append(f"{label}: {'ok' if report else report.first_failure}")
        return outcome

    def verb_laws(self, model, options):
        suites = all_suites(options["seed"], options["scale"], options["oracle"])
        outcome = Outcome(ok=all(suites), report={"suites": suites, "scale": options["scale"]})
        for report in suites:
            outcome.lines.append(f"{report.name}: {'ok' if report else report.first_failure}")
        return outcome
