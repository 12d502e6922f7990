"""Exception types raised across the package."""
from __future__ import annotations


class QkpzError(Exception):
    """Base class for all package errors."""


class ParseError(QkpzError):
    """Malformed tree or expression text.

    Attributes:
        position: zero-based offset into the input where parsing stopped.
        expected: set of token descriptions that would have been accepted.
    """

    def __init__(self, message: str, position: int, expected=()):
        self.position = position
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        detail = f" (expected one of: {exp})" if exp else ""
        super().__init__(f"{message} at position {position}{detail}")


class IncompatibleNoise(QkpzError):
    """Tree product of two roots that both carry the noise."""


class NotSubcritical(QkpzError):
    """Noise degree too low for a finite set of negative-degree trees."""


class StarDomain(QkpzError):
    """Left factor of the star product does not have a One root."""


class Unsupported(QkpzError):
    """Input outside the implemented fragment (e.g. polynomial decorations)."""


class NotDivisible(QkpzError):
    """Exact division of symbolic expressions is not possible."""


class TruncationTooSmall(QkpzError):
    """A coefficient outside the configured truncation was required."""


class NotLocalInput(QkpzError):
    """Input to a locality check is not itself local."""


class NonlocalResidue(QkpzError):
    """A counterterm reduction left a non-local remainder.

    Attributes:
        residue: the offending symbolic expression.
    """

    def __init__(self, message: str, residue=None):
        self.residue = residue
        super().__init__(message if residue is None else f"{message}: {residue}")


class SectorUnsupported(QkpzError):
    """Chain-rule constraints requested for an unknown noise sector."""


class QuadratureFailure(QkpzError):
    """Adaptive quadrature did not reach the requested tolerance."""
