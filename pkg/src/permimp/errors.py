"""Exception types shared across the package.

Every error carries a stable ``slug`` used by the CLI for machine-parseable
error lines and exit-code mapping.
"""


class PermimpError(Exception):
    slug = "internal"


class InvalidParameterError(PermimpError):
    slug = "invalid-parameter"


class InvalidInputError(PermimpError):
    slug = "invalid-input"


class NoDerangementError(PermimpError):
    """Raised when a fixed-point-free permutation is requested for k <= 1."""

    slug = "no-derangement-exists"


class NotAdditiveError(PermimpError):
    slug = "not-additive"


class MissingProvenanceError(PermimpError):
    slug = "missing-provenance"


class WrongDatasetError(PermimpError):
    slug = "wrong-dataset"


class UnsupportedSchemeError(PermimpError):
    slug = "unsupported-scheme"


class InsufficientOobError(PermimpError):
    slug = "insufficient-oob"


class DegenerateResidualsError(PermimpError):
    slug = "degenerate-residuals"


class NeverOobError(PermimpError):
    """Raised when an observation was in-bag for every tree of the forest."""

    slug = "never-oob"


class InvalidFigureError(PermimpError):
    slug = "invalid-figure"
