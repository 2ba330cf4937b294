"""Exception hierarchy shared by every module."""


class FoleError(Exception):
    """Base class for engine errors."""


class UnknownSort(FoleError):
    pass


class UnknownType(FoleError):
    pass


class UnknownRelation(FoleError):
    pass


class UnknownSymbol(FoleError):
    pass


class ArityMismatch(FoleError):
    pass


class SortClash(FoleError):
    pass


class SortError(FoleError):
    pass


class TypeMismatch(FoleError):
    pass


class CapacityExceeded(FoleError):
    pass


class CompositionMismatch(FoleError):
    pass


class InvalidMorphism(FoleError):
    pass


class InvalidStructure(FoleError):
    pass


class UnsoundLogic(FoleError):
    pass


class UnsoundWitness(FoleError):
    pass


class NotCovering(FoleError):
    pass


class ShapeMismatch(FoleError):
    pass


class ConditionViolated(FoleError):
    """A database morphism fails its key/tuple condition at ``(formula, key)``."""

    def __init__(self, message, formula=None, key=None):
        super().__init__(message)
        self.formula = formula
        self.key = key


class FoleSyntaxError(FoleError):
    def __init__(self, message, line=0, column=0, source=None):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.source = source
