"""Errors raised by the resource theory engine.

Every error derives from RtkError so the command layer can map the whole
family onto exit codes in one place.
"""


class RtkError(Exception):
    """Base class of all engine errors."""


# specifications and maps


class EmptySpecification(RtkError):
    pass


class UnknownState(RtkError):
    def __init__(self, label):
        super().__init__(f"unknown state {label!r}")
        self.label = label


class Incompatible(RtkError):
    """Combining contradicting knowledge, i.e. an empty intersection."""

    def __init__(self, message, clash=None):
        super().__init__(message)
        self.clash = clash


class SpaceMismatch(RtkError):
    pass


class InvalidLabel(RtkError):
    pass


class IncompleteMap(RtkError):
    """A map without exactly one image per source state."""


class NotEndomorphism(RtkError):
    pass


# theories


class CapExceeded(RtkError):
    def __init__(self, count, cap):
        super().__init__(f"more than {cap} distinct elements ({count} reached)")
        self.count = count
        self.cap = cap


class NotInMonoid(RtkError):
    pass


class NotSubmonoid(RtkError):
    pass


class NotSubtheory(RtkError):
    pass


# embeddings


class NotLumping(RtkError):
    pass


class NotPartitionLumping(RtkError):
    pass


class NotOrderEmbedding(RtkError):
    pass


class OverlappingImages(RtkError):
    pass


class NotIntensive(RtkError):
    pass


class LumpingOrderViolated(RtkError):
    pass


class IncompatibleSideResource(RtkError):
    pass


class EmptyIntersection(RtkError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# locality


class NotComplete(RtkError):
    pass


class NotIndependent(RtkError):
    pass


class IncompatibleW(RtkError):
    pass


class InternalInconsistency(RtkError):
    pass


class NotIsomorphism(RtkError):
    pass


class NotInJoin(RtkError):
    pass


class NotLocal(RtkError):
    pass


# approximations


class UnknownIndex(RtkError):
    pass


class NoChainsDeclared(RtkError):
    pass


class BadApproxIndex(RtkError):
    pass


# convex structures


class BadProbability(RtkError):
    pass


class DimMismatch(RtkError):
    pass


class LengthMismatch(RtkError):
    pass


class NotFree(RtkError):
    pass


# oracles


class TooLarge(RtkError):
    pass


# theory files


class TheoryFileError(RtkError):
    def __init__(self, line, col, message):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ParseError(TheoryFileError):
    pass


class DuplicateName(TheoryFileError):
    pass


class UnknownReference(TheoryFileError):
    pass
