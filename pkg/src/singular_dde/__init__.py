"""Singular periodic solutions of a two state-dependent delay DDE.

    eps * u'(t) = -u(t) - K1 u(t - a1 - c u(t)) - K2 u(t - a2 - c u(t))

The ``eps = 0`` limit is handled algebraically (``algebra``, ``profiles``,
``branch``); ``eps > 0`` orbits are obtained by forward integration
(``simulator``, ``analysis``).
"""

from .model import (
    BranchIndex,
    ConditionViolation,
    DegenerateCoefficient,
    DegenerateIndex,
    InvalidGain,
    InvalidParams,
    Kind,
    KindMismatch,
    ModelParams,
    SingularDenominator,
    SingularSolution,
)

__all__ = [
    "BranchIndex",
    "ConditionViolation",
    "DegenerateCoefficient",
    "DegenerateIndex",
    "InvalidGain",
    "InvalidParams",
    "Kind",
    "KindMismatch",
    "ModelParams",
    "SingularDenominator",
    "SingularSolution",
]
