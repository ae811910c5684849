"""Record type for a single checked inequality ``lhs <= constant * base``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs_constant: float
    rhs_base: float
    tol: float = 1e-6
    details: dict = field(default_factory=dict, compare=False)

    @property
    def rhs(self) -> float:
        if self.rhs_base == 0.0:
            return 0.0
        return self.rhs_constant * self.rhs_base

    @property
    def margin(self) -> float:
        """``rhs - lhs``; negative means the inequality failed."""
        return self.rhs - self.lhs

    @property
    def ratio(self) -> float:
        """``lhs / rhs``, the fraction of the bound actually used."""
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        if any(math.isnan(v) for v in (self.lhs, self.rhs_constant, self.rhs_base)):
            return False
        if self.rhs == math.inf:
            return True  # vacuous
        scale = max(abs(self.lhs), abs(self.rhs), 1e-300)
        return self.margin >= -self.tol * scale

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs_constant": self.rhs_constant, "rhs_base": self.rhs_base,
                "margin": self.margin, "passed": self.passed, **self.details}
