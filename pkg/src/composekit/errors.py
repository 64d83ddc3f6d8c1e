"""Exception hierarchy.

Every error carries an optional tree-relative ``path`` and 1-based ``line``
so that diagnostics can always be printed as ``path:line: message``.
"""

from __future__ import annotations


class ComposeError(Exception):
    """Base class for all composekit failures."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.line = line

    def __str__(self) -> str:
        loc = ""
        if self.path is not None:
            loc = self.path
            if self.line is not None:
                loc += f":{self.line}"
            loc += ": "
        return f"{loc}{self.message}"


# -- input languages ---------------------------------------------------------


class ConfigSyntaxError(ComposeError):
    """Malformed Config or parfile line."""


class DuplicateDeclaration(ComposeError):
    def __init__(self, name: str, lines: tuple[int, ...], path: str | None = None):
        super().__init__(
            f"duplicate declaration of {name!r} on lines {', '.join(map(str, lines))}",
            path,
            lines[-1],
        )
        self.name = name
        self.lines = lines


# -- tree scanning -------------------------------------------------------------


class ScanError(ComposeError):
    pass


class MissingSimulationUnit(ScanError):
    pass


class ClassificationError(ScanError):
    pass


class NonApiFileAtRoot(ScanError):
    pass


# -- resolution ----------------------------------------------------------------


class ResolutionError(ComposeError):
    pass


class UnknownSimulation(ResolutionError):
    pass


class MissingRequireTarget(ResolutionError):
    pass


class ExcludedRequireTarget(MissingRequireTarget):
    """A hard requirement names a path the command line excluded."""


class ImplementationConflict(ResolutionError):
    def __init__(self, parent: str, first: str, second: str, detail: str = ""):
        msg = f"implementation conflict under {parent}: {first!r} vs {second!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, parent)
        self.parent = parent
        self.choices = (first, second)


class UnknownOverrideTarget(ResolutionError):
    pass


class BadDefault(ResolutionError):
    pass


# -- arbitration ---------------------------------------------------------------


class ArbitrationError(ComposeError):
    pass


class AmbiguousImplementation(ArbitrationError):
    pass


class MissingStub(ArbitrationError):
    pass


class TypeMismatch(ArbitrationError):
    pass


class UnknownParameter(ArbitrationError):
    pass


class ConflictingTypes(ArbitrationError):
    pass


class AmbiguousParameter(ArbitrationError):
    pass


class UnknownName(ComposeError):
    pass


# -- regression harness --------------------------------------------------------


class HarnessError(ComposeError):
    pass


class MissingFixture(HarnessError):
    pass


class BaselineAbsent(HarnessError):
    pass
