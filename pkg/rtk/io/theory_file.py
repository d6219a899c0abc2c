"""Reading and writing theory files.

A theory file is a sequence of bracketed sections, see the README for the
grammar. Parsing validates every reference and every finite object up
front; monoid closures are deferred to ``TheoryModel.theory`` because they
may be expensive or exceed the cap.
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction

from rtk.engine.approx import ApproxIndex, ApproximationStructure
from rtk.engine.convex import AffineMap, PointSpec, RationalPoint, parse_rational
from rtk.engine.embed import Lumping, lumping_from_maps
from rtk.engine.spec_core import SpecMap, StateSpace, make_spec
from rtk.engine.theory import ResourceTheory, close_monoid, deterministic_maps, permutation_maps
from rtk.exceptions import (
    DuplicateName,
    ParseError,
    RtkError,
    UnknownReference,
)

logger = logging.getLogger(__name__)

KINDS = ("states", "space", "map", "monoid", "lumping", "approx", "points", "affine")
BUILTINS = {"@deterministic": deterministic_maps, "@permutations": permutation_maps}
MAIN = "states"

TOKEN = re.compile(r"\S+")
HEADER = re.compile(r"\[(?P<body>[^\[\]]*)\]")
ENTRY = re.compile(r"(?P<state>[^\s{}#=]+?)->(?P<image>\{[^}]*\}|[^\s{}#=]+)")


def _valid_label(label):
    return bool(label) and not any(c in label for c in "{}#=") and "->" not in label


@dataclass(frozen=True)
class MonoidDecl:
    generators: tuple
    cap: int = None


@dataclass(frozen=True)
class LumpingDecl:
    map: str = None
    from_maps: tuple = ()


@dataclass(frozen=True)
class ApproxDecl:
    levels: tuple
    covers: tuple
    max: str
    zero: str = None
    eps: tuple = ()
    chains: tuple = ()
    sums: tuple = ()


@dataclass
class TheoryModel:
    states: StateSpace = None
    spaces: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    monoids: dict = field(default_factory=dict)
    lumpings: dict = field(default_factory=dict)
    approximations: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)
    affine: dict = field(default_factory=dict)
    _theories: dict = field(default_factory=dict, compare=False, repr=False)

    def theory(self, name, cap=None):
        """The closed theory of a monoid section, computed on first use."""
        decl = self._lookup(self.monoids, name, "monoid")
        cap = decl.cap if cap is None else cap
        key = (name, cap)
        if key not in self._theories:
            generators = []
            for generator in decl.generators:
                if generator in BUILTINS:
                    generators.extend(BUILTINS[generator](self.states))
                else:
                    generators.append(self.maps[generator])
            monoid = close_monoid(self.states, generators, cap)
            logger.debug(f"monoid {name} closed to {len(monoid)} elements")
            self._theories[key] = ResourceTheory(self.states, monoid, name)
        return self._theories[key]

    def lumping(self, name):
        decl = self._lookup(self.lumpings, name, "lumping")
        if decl.map is not None:
            return Lumping(self.maps[decl.map].named(name))
        lumping, _ = lumping_from_maps([self.maps[m] for m in decl.from_maps], space=self.states)
        return Lumping(lumping.map.named(name))

    def structure(self, name):
        decl = self._lookup(self.approximations, name, "approx")
        chains = [
            (chain, members, [(a, b, total) for c, a, b, total in decl.sums if c == chain])
            for chain, members in decl.chains
        ]
        index = ApproxIndex.from_covers(decl.levels, decl.covers, decl.max, decl.zero, chains)
        family = {level: self.maps[m].named(f"{name}^{level}") for level, m in decl.eps}
        return ApproximationStructure(index, family, name)

    def map(self, name):
        return self._lookup(self.maps, name, "map")

    def point_spec(self, name):
        return self._lookup(self.points, name, "points")

    def affine_map(self, name):
        return self._lookup(self.affine, name, "affine")

    def spec(self, text):
        """A specification of the main space from space-separated labels."""
        return make_spec(self.states, text.split())

    @staticmethod
    def _lookup(table, name, kind):
        try:
            return table[name]
        except KeyError:
            raise RtkError(f"no {kind} section named {name!r}") from None


class _Section:
    def __init__(self, kind, name, line, col, source=None, target=None):
        self.kind = kind
        self.name = name
        self.line = line
        self.col = col
        self.source = source
        self.target = target
        self.body = []

    def error(self, cls, message):
        return cls(self.line, self.col, message)


def _strip_comment(text):
    return text.split("#", 1)[0]


def _parse_header(text, lineno):
    """The section opened on this line and the rest of the line, columns kept."""
    start = text.index("[")
    match = HEADER.match(text, start)
    col = start + 1
    if not match:
        raise ParseError(lineno, col, "malformed section header")
    words = match.group("body").split()
    if not words:
        raise ParseError(lineno, col, "empty section header")
    kind = words[0]
    if kind not in KINDS:
        raise ParseError(lineno, col + 1, f"unknown section kind {kind!r}")
    source = target = None
    if kind == "map" and len(words) == 6 and words[2] == "from" and words[4] == "to":
        source, target = words[3], words[5]
        words = words[:2]
    if kind == "states":
        if len(words) != 1:
            raise ParseError(lineno, col, "the states section takes no name")
        return _Section(kind, MAIN, lineno, col), _rest(text, match)
    if len(words) != 2:
        raise ParseError(lineno, col, f"expected [{kind} NAME]")
    if not _valid_label(words[1]):
        raise ParseError(lineno, col, f"invalid name {words[1]!r}")
    return _Section(kind, words[1], lineno, col, source, target), _rest(text, match)


def _rest(text, match):
    return " " * match.end() + text[match.end() :]


def _split_sections(text):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if line.lstrip().startswith("["):
            current, rest = _parse_header(line, lineno)
            sections.append(current)
            if rest.strip():
                current.body.append((lineno, rest))
        elif current is None:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError(lineno, col, "content before the first section")
        else:
            current.body.append((lineno, line))
    return sections


def _tokens(body):
    for lineno, line in body:
        for match in TOKEN.finditer(line):
            yield lineno, match.start() + 1, match.group()


def _key_lines(section):
    """(lineno, col, key, argument, value tokens) for ``key [arg] = values`` lines."""
    for lineno, line in section.body:
        left, sep, right = line.partition("=")
        col = len(line) - len(line.lstrip()) + 1
        if not sep:
            raise ParseError(lineno, col, "expected key = value")
        words = left.split()
        if not words or len(words) > 2:
            raise ParseError(lineno, col, "malformed key")
        yield lineno, col, words[0], words[1] if len(words) == 2 else None, right.split()


class _Parser:
    def __init__(self):
        self.model = TheoryModel()

    def parse(self, text):
        sections = _split_sections(text)
        if not sections or sections[0].kind != "states":
            line, col = (sections[0].line, sections[0].col) if sections else (1, 1)
            raise ParseError(line, col, "a theory file starts with the [states] section")
        for section in sections:
            handler = getattr(self, f"_{section.kind}")
            handler(section)
        return self.model

    def _claim(self, table, section):
        if section.name in table:
            raise section.error(DuplicateName, f"{section.kind} {section.name!r} is already defined")

    def _labels(self, section):
        labels = []
        for lineno, col, token in _tokens(section.body):
            if not _valid_label(token):
                raise ParseError(lineno, col, f"invalid state label {token!r}")
            if token in labels:
                raise ParseError(lineno, col, f"state {token!r} is listed twice")
            labels.append(token)
        if not labels:
            raise section.error(ParseError, "a state space needs at least one state")
        return StateSpace(tuple(labels))

    def _states(self, section):
        if self.model.states is not None:
            raise section.error(DuplicateName, "the states section is already defined")
        self.model.states = self._labels(section)
        self.model.spaces[MAIN] = self.model.states

    def _space(self, section):
        self._claim(self.model.spaces, section)
        self.model.spaces[section.name] = self._labels(section)

    def _space_ref(self, section, name):
        if name not in self.model.spaces:
            raise section.error(UnknownReference, f"unknown space {name!r}")
        return self.model.spaces[name]

    def _map(self, section):
        self._claim(self.model.maps, section)
        source = self._space_ref(section, section.source or MAIN)
        target = self._space_ref(section, section.target or MAIN)
        images = {}
        for lineno, line in section.body:
            position = 0
            for match in ENTRY.finditer(line):
                gap = line[position : match.start()]
                if gap.strip():
                    raise ParseError(lineno, position + len(gap) - len(gap.lstrip()) + 1, "expected state->image")
                position = match.end()
                col = match.start() + 1
                state, image = match.group("state"), match.group("image")
                if state not in source.labels:
                    raise ParseError(lineno, col, f"unknown state {state!r}")
                if state in images:
                    raise ParseError(lineno, col, f"state {state!r} is mapped twice")
                labels = image.strip("{}").split() if image.startswith("{") else [image]
                if not labels:
                    raise ParseError(lineno, match.start("image") + 1, "empty image")
                for label in labels:
                    if label not in target.labels:
                        raise ParseError(lineno, match.start("image") + 1, f"unknown state {label!r}")
                images[state] = labels
            rest = line[position:]
            if rest.strip():
                raise ParseError(lineno, position + len(rest) - len(rest.lstrip()) + 1, "expected state->image")
        missing = [label for label in source.labels if label not in images]
        if missing:
            raise section.error(ParseError, f"no image for state {missing[0]!r}")
        self.model.maps[section.name] = SpecMap.from_images(source, target, images, section.name)

    def _endomorphism(self, lineno, col, name):
        if name not in self.model.maps:
            raise UnknownReference(lineno, col, f"unknown map {name!r}")
        f = self.model.maps[name]
        if f.source != self.model.states or f.target != self.model.states:
            raise ParseError(lineno, col, f"map {name!r} does not act on the states")
        return name

    def _monoid(self, section):
        self._claim(self.model.monoids, section)
        generators, cap = None, None
        for lineno, col, key, argument, values in _key_lines(section):
            if key == "generators" and argument is None:
                generators = tuple(
                    value if value in BUILTINS else self._endomorphism(lineno, col, value)
                    for value in values
                )
            elif key == "cap" and argument is None and len(values) == 1 and values[0].isdigit():
                cap = int(values[0])
            else:
                raise ParseError(lineno, col, f"unexpected monoid key {key!r}")
        if generators is None:
            raise section.error(ParseError, "a monoid needs a generators line")
        self.model.monoids[section.name] = MonoidDecl(generators, cap)

    def _lumping(self, section):
        self._claim(self.model.lumpings, section)
        decl = None
        for lineno, col, key, argument, values in _key_lines(section):
            if decl is not None:
                raise ParseError(lineno, col, "a lumping takes exactly one line")
            if key == "map" and len(values) == 1:
                decl = LumpingDecl(map=self._endomorphism(lineno, col, values[0]))
            elif key == "from-maps":
                decl = LumpingDecl(
                    from_maps=tuple(self._endomorphism(lineno, col, v) for v in values)
                )
            else:
                raise ParseError(lineno, col, f"unexpected lumping key {key!r}")
        if decl is None:
            raise section.error(ParseError, "a lumping needs map = M or from-maps = ...")
        self.model.lumpings[section.name] = decl
        try:
            self.model.lumping(section.name)
        except RtkError as exc:
            del self.model.lumpings[section.name]
            raise section.error(ParseError, str(exc)) from exc

    def _approx(self, section):
        self._claim(self.model.approximations, section)
        fields = {"levels": (), "covers": (), "max": None, "zero": None}
        eps, chains, sums = [], [], []
        for lineno, col, key, argument, values in _key_lines(section):
            if key == "levels" and argument is None:
                fields["levels"] = tuple(values)
            elif key == "covers" and argument is None:
                covers = []
                for value in values:
                    low, sep, high = value.partition("<")
                    if not sep or not low or not high:
                        raise ParseError(lineno, col, f"malformed cover {value!r}")
                    covers.append((low, high))
                fields["covers"] = tuple(covers)
            elif key in ("max", "zero") and argument is None and len(values) == 1:
                fields[key] = values[0]
            elif key == "eps" and argument and len(values) == 1:
                eps.append((argument, self._endomorphism(lineno, col, values[0])))
            elif key == "chain" and argument:
                chains.append((argument, tuple(values)))
            elif key == "sum" and argument:
                for value in values:
                    match = re.fullmatch(r"([^+=]+)\+([^+=]+)=([^+=]+)", value)
                    if not match:
                        raise ParseError(lineno, col, f"malformed sum {value!r}")
                    sums.append((argument,) + match.groups())
            else:
                raise ParseError(lineno, col, f"unexpected approx key {key!r}")
        if fields["max"] is None:
            raise section.error(ParseError, "an approximation structure needs max = E")
        declared = [chain for chain, _ in chains]
        for chain, *_ in sums:
            if chain not in declared:
                raise section.error(UnknownReference, f"sum names an undeclared chain {chain!r}")
        sums = [entry for chain in declared for entry in sums if entry[0] == chain]
        decl = ApproxDecl(
            fields["levels"],
            fields["covers"],
            fields["max"],
            fields["zero"],
            tuple(eps),
            tuple(chains),
            tuple(sums),
        )
        self.model.approximations[section.name] = decl
        try:
            self.model.structure(section.name)
        except RtkError as exc:
            del self.model.approximations[section.name]
            raise section.error(ParseError, str(exc)) from exc

    def _rational(self, lineno, col, token):
        return parse_rational(token, lineno, col)

    def _points(self, section):
        self._claim(self.model.points, section)
        points = []
        for lineno, line in section.body:
            coords = [self._rational(lineno, m.start() + 1, m.group()) for m in TOKEN.finditer(line)]
            points.append(RationalPoint(tuple(coords)))
        try:
            self.model.points[section.name] = PointSpec(tuple(points))
        except RtkError as exc:
            raise section.error(ParseError, str(exc)) from exc

    def _affine(self, section):
        self._claim(self.model.affine, section)
        rows, offset = [], None
        for lineno, col, key, argument, values in _key_lines(section):
            numbers = [self._rational(lineno, col, v) for v in values]
            if key == "row" and argument is None:
                rows.append(tuple(numbers))
            elif key == "offset" and argument is None:
                offset = tuple(numbers)
            else:
                raise ParseError(lineno, col, f"unexpected affine key {key!r}")
        offset = offset if offset is not None else (0,) * len(rows)
        try:
            self.model.affine[section.name] = AffineMap(tuple(rows), offset, section.name)
        except RtkError as exc:
            raise section.error(ParseError, str(exc)) from exc


def parse_theory(text):
    model = _Parser().parse(text)
    logger.debug(
        f"parsed {len(model.maps)} maps, {len(model.monoids)} monoids and "
        f"{len(model.lumpings)} lumpings over {model.states.size} states"
    )
    return model


def load_theory(path):
    with open(path, encoding="utf-8") as handle:
        return parse_theory(handle.read())


def _rational_text(value):
    return str(Fraction(value))


def render_theory(model):
    """Canonical text of a model; parsing it gives the model back."""
    out = ["[states] " + " ".join(model.states.labels)]
    spaces = {space: name for name, space in model.spaces.items()}
    for name, space in model.spaces.items():
        if name != MAIN:
            out += ["", f"[space {name}] " + " ".join(space.labels)]
    for name, f in model.maps.items():
        if f.source == model.states and f.target == model.states:
            header = f"[map {name}]"
        else:
            header = f"[map {name} from {spaces[f.source]} to {spaces[f.target]}]"
        out += ["", header, f.describe()]
    for name, decl in model.monoids.items():
        out += ["", f"[monoid {name}]", "generators = " + " ".join(decl.generators)]
        if decl.cap is not None:
            out.append(f"cap = {decl.cap}")
    for name, decl in model.lumpings.items():
        out += ["", f"[lumping {name}]"]
        out.append(f"map = {decl.map}" if decl.map is not None else "from-maps = " + " ".join(decl.from_maps))
    for name, decl in model.approximations.items():
        out += ["", f"[approx {name}]", "levels = " + " ".join(decl.levels)]
        if decl.covers:
            out.append("covers = " + " ".join(f"{a}<{b}" for a, b in decl.covers))
        out.append(f"max = {decl.max}")
        if decl.zero is not None:
            out.append(f"zero = {decl.zero}")
        out += [f"eps {level} = {m}" for level, m in decl.eps]
        out += [f"chain {chain} = " + " ".join(members) for chain, members in decl.chains]
        for chain, _ in decl.chains:
            entries = [f"{a}+{b}={total}" for c, a, b, total in decl.sums if c == chain]
            if entries:
                out.append(f"sum {chain} = " + " ".join(entries))
    for name, spec in model.points.items():
        out += ["", f"[points {name}]"] + [" ".join(_rational_text(c) for c in x.coords) for x in spec]
    for name, g in model.affine.items():
        out += ["", f"[affine {name}]"]
        out += ["row = " + " ".join(_rational_text(a) for a in row) for row in g.matrix]
        out.append("offset = " + " ".join(_rational_text(b) for b in g.offset))
    return "\n".join(out) + "\n"
