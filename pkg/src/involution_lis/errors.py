"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class InvolutionLisError(Exception):
    """Base class; the CLI maps these to exit status 1."""


class InvalidConfig(InvolutionLisError):
    pass


class NonConvergence(InvolutionLisError):
    pass


class OutOfDomain(InvolutionLisError):
    pass


class TooLarge(InvolutionLisError):
    pass


class MalformedPermutation(InvolutionLisError):
    pass


class PrecisionUnachievable(InvolutionLisError):
    pass


class PrecisionLoss(InvolutionLisError):
    pass


class TruncationUncertified(InvolutionLisError):
    pass


class UnsupportedScaling(InvolutionLisError):
    pass
