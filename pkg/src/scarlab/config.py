"""Chain geometry and model parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class InvalidConfigError(ValueError):
    """Raised when chain parameters are out of range."""


@dataclass(frozen=True)
class SpinChainConfig:
    """Periodic spin-j chain with blockade weight ``a`` and deformation angle ``theta``.

    Parameters
    ----------
    twoJ : int
        2j, so j in {1/2, 1, 3/2, ...}. Local dimension is d = twoJ + 1.
    N : int
        Number of sites (>= 2). Boundary conditions are always periodic.
    a : float
        Interaction weight in [0, 1]. a=1 is the free collective-spin chain,
        a=0 the fully blockaded one.
    theta : float
        Deformation angle, reduced into [0, 2pi). Physical spectra do not
        depend on it (unitary equivalence); it is kept for completeness.
    """

    twoJ: int
    N: int
    a: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.twoJ < 1:
            raise InvalidConfigError(f"twoJ must be >= 1, got {self.twoJ}")
        if self.N < 2:
            raise InvalidConfigError(f"N must be >= 2, got {self.N}")
        d = self.twoJ + 1
        if self.N * math.ceil(math.log2(d)) > 63:
            raise InvalidConfigError(
                f"chain too large to pack into 64-bit codes: N={self.N}, d={d}"
            )
        if not 0.0 <= self.a <= 1.0:
            raise InvalidConfigError(f"a must lie in [0, 1], got {self.a}")
        object.__setattr__(self, "theta", self.theta % (2.0 * math.pi))

    @property
    def d(self) -> int:
        """Local Hilbert-space dimension."""
        return self.twoJ + 1

    @property
    def j(self) -> float:
        return self.twoJ / 2.0

    @property
    def dim(self) -> int:
        """Full chain dimension d**N."""
        return self.d ** self.N

    def replace(self, **kw) -> "SpinChainConfig":
        data = {"twoJ": self.twoJ, "N": self.N, "a": self.a, "theta": self.theta}
        data.update(kw)
        return SpinChainConfig(**data)
