"""Physical constants shared by every module."""
from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PhysicalParams"]


@dataclass(frozen=True)
class PhysicalParams:
    """hbar and particle mass, both strictly positive (natural units by default)."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")
