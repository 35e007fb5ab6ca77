"""Physical constants (SI, exact CODATA 2018 values)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    e: float = _sc.e
    h: float = _sc.h

    @property
    def Phi0(self) -> float:
        """Superconducting flux quantum h/(2e) in Wb."""
        return self.h / (2 * self.e)

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)


CONSTANTS = PhysicalConstants()

# unit scale factors
MHZ = 1e6
NH = 1e-9
FF = 1e-15
MM = 1e-3
