"""
Error types shared by the simulator, the analysis layer and the commands.

Each class carries the process exit code its management command should
return.
"""


class BellSimError(Exception):
    """Base class for every error raised by the package."""
    exit_code = 4


class DomainError(BellSimError, ValueError):
    """An argument lies outside the domain of a physical formula."""
    exit_code = 2


class PreconditionError(BellSimError, ValueError):
    """Input violates a documented precondition (e.g. unsorted timestamps)."""
    exit_code = 3


class ConfigurationError(BellSimError):
    """
    Invalid run configuration.
    `diagnostics` maps dotted field paths to messages.
    """
    exit_code = 2

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        text = super().__str__()
        if not self.diagnostics:
            return text
        lines = [f'  {path}: {msg}' for path, msg in sorted(self.diagnostics.items())]
        return text + '\n' + '\n'.join(lines)


class DataError(BellSimError):
    """Input data is inconsistent or incomplete."""
    exit_code = 3


class ParseError(DataError):
    """Malformed counts or report file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)
        self.line = line


class IncompleteDataError(DataError):
    """A required intensity pair or basis is missing."""


class MergeError(DataError):
    """Counts tables from incompatible configurations."""


class InfeasibleError(DataError):
    """
    The decoy linear program has no feasible point.
    `violated` lists the labels of constraints left unsatisfied by phase 1.
    """

    def __init__(self, message, violated=(), residual=None):
        super().__init__(message)
        self.violated = tuple(violated)
        self.residual = residual

    def certificate(self):
        lines = [f'phase-1 residual: {self.residual:.3e}' if self.residual is not None else 'phase-1 residual: n/a']
        lines.extend(f'  violated: {label}' for label in self.violated)
        return '\n'.join(lines)


class TruncationError(BellSimError):
    """Fock-space cutoff leaves too much probability mass in the tail."""
    exit_code = 4


class NumericalFailure(BellSimError):
    """A numerical routine could not produce a trustworthy answer."""
    exit_code = 4
