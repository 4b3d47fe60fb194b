"""Exception types raised by seplab.

Every failure that signals a broken mathematical invariant derives from
``InvariantFailure`` so callers (the CLI in particular) can map it to a
distinct exit code from plain input errors.
"""
from __future__ import annotations


class SeplabError(Exception):
    """Base class for all seplab errors."""


class InputError(SeplabError, ValueError):
    """A caller supplied arguments outside an operation's domain."""


class InvariantFailure(SeplabError, ArithmeticError):
    """An exact identity that must hold did not."""


class NonPositiveEps(InputError):
    pass


class DegreeTooHigh(InputError):
    pass


class OrderMismatch(InputError):
    pass


class TruncationTooLarge(InputError):
    pass


class InsufficientOrder(InputError):
    pass


class EmptyInput(InputError):
    pass


class OutOfDomain(InputError):
    pass


class DivisibilityFailure(InvariantFailure):
    pass


class ParityFailure(InvariantFailure):
    pass


class StructureFailure(InvariantFailure):
    pass


class ResonanceFailure(InvariantFailure):
    pass


class NoCrossing(SeplabError):
    """An orbit never met its stopping condition within the step budget."""


class PrecisionInsufficient(SeplabError):
    """A measured quantity is too close to the rounding floor to trust."""
