"""Exception types shared across the pipeline."""


class ReqliftError(Exception):
    """Base class for all workbench errors."""


class CorpusError(ReqliftError):
    """Malformed corpus or configuration file."""


class ParseError(ReqliftError):
    """Sentence rejected by the controlled grammar.

    Carries the first unmatched token span so the user can fix the text.
    """

    def __init__(self, message, tokens=None, position=None):
        super().__init__(message)
        self.tokens = tokens or []
        self.position = position


class ConflictError(ReqliftError):
    """Two type rules wrote conflicting values to the same IR slot."""

    def __init__(self, message, first_rule=None, second_rule=None):
        super().__init__(message)
        self.first_rule = first_rule
        self.second_rule = second_rule


class StructureError(ReqliftError):
    """Predicate graph has no root, or more than one."""


class PlacementError(ReqliftError):
    """Formula assigns a variable that is declared as an input."""


class ModelError(ReqliftError):
    """Inconsistent transition-system model (e.g. clashing initializations)."""


class NonGR1Error(ReqliftError):
    """Formula does not fit any GR(1) conjunct shape."""

    def __init__(self, message, formula=None):
        super().__init__(message)
        self.formula = formula


class ResourceError(ReqliftError):
    """Configured state-space or bit cap exceeded."""


class ProtocolError(ReqliftError):
    """Malformed game/session message (e.g. missing output atom)."""


class NoOpError(ReqliftError):
    """Operation has nothing to do (e.g. mining a realizable spec)."""
