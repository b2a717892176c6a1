"""Shared value types and exceptions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class InvalidParams(ValueError):
    """Raised when a parameter set violates the model constraints.

    ``problems`` lists every violated constraint, not just the first.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid parameters: " + "; ".join(self.problems))


class DegenerateIndex(ValueError):
    """An (n, m) index for which the requested quantity does not exist."""


class SingularDenominator(ZeroDivisionError):
    """The bimodal denominator 1 - m(K1-1) + n(1+K1+K2) vanishes."""


class DegenerateCoefficient(ValueError):
    """A parametrisation slope coefficient fell outside (0, 1)."""


class InvalidGain(ValueError):
    """The one-delay construction needs K > 1."""


class KindMismatch(ValueError):
    """A solution of one kind was passed where another kind is required."""


class ConditionViolation(Exception):
    """A singular-solution construction failed one or more strict inequalities.

    ``violations`` maps condition name to its margin (``<= 0`` means violated);
    ``margins`` holds every condition, violated or not.
    """

    def __init__(self, kind: "Kind", violations: dict[str, float], margins: dict[str, float]):
        self.kind = kind
        self.violations = dict(violations)
        self.margins = dict(margins)
        detail = ", ".join(f"{k} (margin {v:.6g})" for k, v in self.violations.items())
        super().__init__(f"{kind.value}: violated {detail}")


class Kind(str, enum.Enum):
    UNIMODAL = "unimodal"
    TYPE_I = "typeI"
    TYPE_II = "typeII"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {
            "unimodal": cls.UNIMODAL, "uni": cls.UNIMODAL, "u": cls.UNIMODAL,
            "typei": cls.TYPE_I, "i": cls.TYPE_I, "type1": cls.TYPE_I,
            "typeii": cls.TYPE_II, "ii": cls.TYPE_II, "type2": cls.TYPE_II,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown solution kind {text!r}") from None


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the DDE.

    ``eps`` is carried everywhere but only the simulator uses it.
    """

    eps: float = 0.0
    K1: float = 1.0
    K2: float = 0.5
    a1: float = 1.0
    a2: float = 2.0
    c: float = 1.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise InvalidParams(problems)

    def problems(self) -> list[str]:
        out = []
        if not self.eps >= 0:
            out.append(f"eps must be >= 0 (got {self.eps})")
        if not self.K1 > 0:
            out.append(f"K1 must be > 0 (got {self.K1})")
        if not 0 < self.K2 < 1:
            out.append(f"K2 must lie in (0, 1) (got {self.K2})")
        if not self.a1 > 0:
            out.append(f"a1 must be > 0 (got {self.a1})")
        if not self.a2 > self.a1:
            out.append(f"a2 must exceed a1 (got a1={self.a1}, a2={self.a2})")
        if not self.c > 0:
            out.append(f"c must be > 0 (got {self.c})")
        return out

    @classmethod
    def from_ratio(cls, A: float, K1: float = 1.0, K2: float = 0.5, a1: float = 1.0,
                   c: float = 1.0, eps: float = 0.0) -> "ModelParams":
        return cls(eps=eps, K1=K1, K2=K2, a1=a1, a2=A * a1, c=c)

    @property
    def A(self) -> float:
        return self.a2 / self.a1

    def with_K1(self, K1: float) -> "ModelParams":
        return replace(self, K1=K1)

    def with_eps(self, eps: float) -> "ModelParams":
        return replace(self, eps=eps)

    def as_dict(self) -> dict:
        return {"eps": self.eps, "K1": self.K1, "K2": self.K2, "a1": self.a1,
                "a2": self.a2, "c": self.c, "A": self.A}


@dataclass(frozen=True)
class BranchIndex:
    """Whole periods to the first delay (n) and between the two delays (m)."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise DegenerateIndex(f"indices must be non-negative, got n={self.n}, m={self.m}")


@dataclass(frozen=True)
class SingularSolution:
    """One eps = 0 periodic solution.

    For unimodal solutions ``T1 == T`` and ``T2 == 0``.  ``marginal`` names the
    conditions that hold with a margin below 1e-9 and ``notes`` carries
    construction metadata (e.g. the linear-G case with n > 0).
    """

    kind: Kind
    index: BranchIndex
    T: float
    T1: float
    T2: float
    theta: float
    K1: float
    margins: dict = field(default_factory=dict, compare=False)
    marginal: tuple = ()
    notes: tuple = ()

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def m(self) -> int:
        return self.index.m
