"""Exception hierarchy shared by every deckhand module."""
from __future__ import annotations


class DeckhandError(Exception):
    """Base class for all errors raised by deckhand."""


class ConfigError(DeckhandError):
    """Configuration file is missing keys or holds invalid values."""


class UsageError(DeckhandError, ValueError):
    """Caller supplied an unusable argument (e.g. an empty instruction)."""


class DeckIOError(DeckhandError, OSError):
    """Reading or writing a file on disk failed."""


# -- deck model -------------------------------------------------------------


class NotFound(DeckhandError, LookupError):
    """No shape matched a selector."""


class Ambiguous(DeckhandError, LookupError):
    """A shape name matched more than one shape and no id matched."""


# -- package reading --------------------------------------------------------


class PackageError(DeckhandError):
    pass


class NotAZip(PackageError):
    pass


class MalformedPackage(PackageError):
    pass


class MalformedXml(PackageError):
    def __init__(self, part: str, detail: str):
        super().__init__(f"{part}: {detail}")
        self.part = part


# -- edit scripts -----------------------------------------------------------


class ScriptError(DeckhandError):
    pass


class ScriptParseError(ScriptError):
    def __init__(self, message: str, raw: str = "", field: str | None = None):
        super().__init__(message)
        self.raw = raw
        self.field = field


class ScriptValidationError(ScriptError):
    """An op references something that will not exist when it runs.

    ``op_index`` is ``None`` when the error is raised outside script
    validation (e.g. by ``slide_to_json``).
    """

    def __init__(self, message: str, op_index: int | None = None):
        prefix = f"op {op_index}: " if op_index is not None else ""
        super().__init__(prefix + message)
        self.op_index = op_index


class SlideOutOfRange(ScriptValidationError, IndexError):
    pass


class ShapeNotFound(ScriptValidationError, LookupError):
    pass


class RunOutOfRange(ScriptValidationError, IndexError):
    pass


class InvalidColor(ScriptValidationError, ValueError):
    pass


class InvalidGeometry(ScriptValidationError, ValueError):
    pass


class ApplyError(ScriptError):
    def __init__(self, message: str, op_index: int | None = None):
        prefix = f"op {op_index}: " if op_index is not None else ""
        super().__init__(prefix + message)
        self.op_index = op_index


# -- planner / editor -------------------------------------------------------


class PlanError(DeckhandError):
    pass


class PlanParseError(PlanError):
    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class PageOutOfRange(PlanError):
    def __init__(self, task_index: int, page_number: int, slide_count: int):
        super().__init__(
            f"task {task_index} targets page {page_number}, deck has {slide_count} slides"
        )
        self.task_index = task_index
        self.page_number = page_number
        self.slide_count = slide_count


class EmptyPlan(PlanError):
    pass


class EditError(DeckhandError):
    pass


class EditParseError(EditError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class StructureMismatch(EditError):
    def __init__(self, details: list[str]):
        super().__init__("; ".join(details))
        self.details = details


class InternalError(DeckhandError):
    """A precondition between pipeline stages was violated."""


# -- providers --------------------------------------------------------------


class ProviderError(DeckhandError):
    pass


class TransportError(ProviderError):
    pass


class AuthError(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


class BadResponse(ProviderError):
    pass


# -- bench ------------------------------------------------------------------


class BenchError(DeckhandError):
    pass


class ManifestError(BenchError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"manifest line {line}: {reason}")
        self.line = line
        self.reason = reason


class JudgeParseError(BenchError):
    pass


class OutOfRange(BenchError, ValueError):
    pass


class EmptySuite(BenchError):
    pass


class DegenerateInput(BenchError, ValueError):
    pass


class RenderUnavailable(BenchError):
    pass
