"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI lives in ``otl.harness``.
"""


class OtlError(Exception):
    """Base class for all package errors."""


class DomainError(OtlError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(OtlError, ValueError):
    """An experiment configuration is invalid."""


class MeshError(OtlError):
    """Mesh construction or query failure."""


class StructuralError(OtlError):
    """Mismatched mesh/field or other structural inconsistency."""


class SolverError(OtlError):
    """Nonlinear or linear solver failure."""


class ArtifactError(OtlError):
    """Missing or inconsistent on-disk artifacts."""
