"""Exception types shared across the package."""

from __future__ import annotations


class HybridlsError(Exception):
    """Base class for all domain errors raised by this package."""


class MalformedInput(HybridlsError):
    """An argument fails a shape check (bad identifier, bad payload field)."""


class TargetMissing(HybridlsError):
    """An ElementId does not resolve to an element of the model."""


class InvalidContainer(HybridlsError):
    """A container element cannot hold a child of the requested kind."""


class StaleSpan(HybridlsError):
    """A span table entry no longer fits the document text."""


class MutationRejected(HybridlsError):
    """A mutation was refused; the model is unchanged.

    Carries the diagnostics explaining the refusal (duplicate name,
    delete of a referenced element, ...).
    """

    def __init__(self, code: str, diagnostics: list):
        super().__init__(f"{code}: {diagnostics[0].message if diagnostics else 'rejected'}")
        self.code = code
        self.diagnostics = diagnostics


class UnknownView(HybridlsError):
    """A ViewId does not name a view of the current model."""


class AnalysisUnavailable(HybridlsError):
    """An analysis view cannot be computed (no resolvable initial state)."""


class AlreadyOpen(HybridlsError):
    """open() was called for a uri that is already open."""


class UnknownDocument(HybridlsError):
    """An operation referenced a uri that is not open."""


class StaleVersion(HybridlsError):
    """A textual change arrived with a non-increasing client version."""


class StaleRevision(HybridlsError):
    """A graphical operation was based on an outdated document revision."""


class DocumentStale(HybridlsError):
    """The document text does not parse; graphical edits are refused."""


class PaletteViolation(HybridlsError):
    """The mutation kind is not offered by the palette of the view."""


class NotDrillable(HybridlsError):
    """The clicked element has no drill-down target view."""
