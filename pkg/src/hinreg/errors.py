"""Exception hierarchy shared by all modules."""


class HinError(Exception):
    pass


# graph construction
class UnknownType(HinError):
    pass


class UnknownNode(HinError):
    pass


class TypeMismatch(HinError):
    pass


class NegativeWeight(HinError):
    pass


class AlreadyAugmented(HinError):
    pass


class NotAugmented(HinError):
    pass


class NoSuchPair(HinError):
    pass


# meta-paths
class MetaPathError(HinError):
    """Base for parse/validation failures; ``pos`` is a character offset when known."""

    def __init__(self, msg, pos=None):
        if pos is not None:
            msg = f"{msg} (at position {pos})"
        super().__init__(msg)
        self.pos = pos


class UnknownLinkType(MetaPathError):
    pass


class ChainMismatch(MetaPathError):
    pass


class BadExclusion(MetaPathError):
    pass


# random walks
class SchemaMismatch(HinError):
    pass


class PathExplosion(HinError):
    pass


class BatchError(HinError):
    def __init__(self, index, cause):
        super().__init__(f"meta-path #{index} failed: {cause}")
        self.index = index
        self.cause = cause


# regression
class ShapeMismatch(HinError):
    pass


class EmptySubset(HinError):
    pass


class Singular(HinError):
    def __init__(self, msg, column=None):
        super().__init__(msg)
        self.column = column


class Underdetermined(HinError):
    pass


# validation
class DegenerateSplit(HinError):
    pass


class TooFewEdges(HinError):
    pass


class UncategorizedNode(HinError):
    pass


class PivotNotOnPath(HinError):
    pass


# ingestion
class IngestError(HinError):
    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line
