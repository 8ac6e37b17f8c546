"""Product-state basis handling for spin-j chains.

A basis state is packed into one signed 64-bit integer as base-d digits,
digit value = m + j, with site 1 in the least-significant digit. This
bijection is fixed so that independently written oracles can reproduce the
codes bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import SpinChainConfig


class BasisMismatchError(ValueError):
    """Raised when operators or states over different bases are combined."""


def encode_state(ms_twice, cfg: SpinChainConfig) -> int:
    """Pack a tuple of 2m values (site 1 first) into one code."""
    code = 0
    for l, m2 in enumerate(reversed(list(ms_twice))):
        digit = (m2 + cfg.twoJ) // 2
        if not 0 <= digit < cfg.d:
            raise ValueError(f"2m={m2} out of range for twoJ={cfg.twoJ}")
        code = code * cfg.d + digit
    return code


def decode_state(code: int, cfg: SpinChainConfig):
    """Inverse of :func:`encode_state`; returns a tuple of 2m values."""
    out = []
    for _ in range(cfg.N):
        out.append(2 * (code % cfg.d) - cfg.twoJ)
        code //= cfg.d
    return tuple(out)


def digits_of(codes, d: int, N: int) -> np.ndarray:
    """(n, N) array of base-d digits, site 1 in column 0."""
    codes = np.asarray(codes, dtype=np.int64)
    return np.stack([(codes // d ** l) % d for l in range(N)], axis=1)


def translate_codes(codes, d: int, N: int) -> np.ndarray:
    """Shift every digit one site up (site l -> l+1, cyclic)."""
    codes = np.asarray(codes, dtype=np.int64)
    dtop = d ** (N - 1)
    return (codes % dtop) * d + codes // dtop


@dataclass(frozen=True)
class ChainBasis:
    """An ordered set of product-state codes over a spin chain."""

    cfg: SpinChainConfig
    codes: np.ndarray
    label: str = "full"

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.int64)
        object.__setattr__(self, "codes", codes)

    @property
    def dim(self) -> int:
        return len(self.codes)

    def index_of(self, codes) -> np.ndarray:
        """Positions of the given codes; -1 where a code is absent."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.codes, codes)
        pos = np.clip(pos, 0, self.dim - 1)
        ok = self.codes[pos] == codes
        return np.where(ok, pos, -1)

    def pattern_counts(self) -> np.ndarray:
        return _kernels.count_patterns(self.codes, self.cfg.d, self.cfg.N)

    def same_as(self, other) -> bool:
        # a and theta are model parameters, not basis identity
        return (
            isinstance(other, ChainBasis)
            and (self.cfg.twoJ, self.cfg.N) == (other.cfg.twoJ, other.cfg.N)
            and self.label == other.label
            and self.dim == other.dim
            and bool(np.array_equal(self.codes, other.codes))
        )


def full_basis(cfg: SpinChainConfig) -> ChainBasis:
    """All d**N product states in code order."""
    return ChainBasis(cfg, np.arange(cfg.dim, dtype=np.int64), label="full")
