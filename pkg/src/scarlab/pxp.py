"""Constrained spin-1/2 ring, the spin-1 correspondence, and generalizations.

The blockade ring lives on bit codes with no cyclically adjacent set bits
(bit = excited site). The spin-1 zero-pattern sector of an N-site chain maps
one-to-one onto the 2N-site blockade ring through the local dictionary
m=+1 -> (down, up), m=0 -> (down, down), m=-1 -> (up, down) on site pairs
(2l-1, 2l); under it the blockaded chain Hamiltonian equals the constrained
flip model up to a factor sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import ChainBasis, digits_of, full_basis
from .config import InvalidConfigError, SpinChainConfig
from .operators import SparseOperator, local_spin_matrices
from .sectors import Sector


def lucas_number(M: int) -> int:
    """Count of cyclic binary strings of length M with no adjacent ones."""
    a, b = 2, 1  # L0, L1
    for _ in range(M):
        a, b = b, a + b
    return a


def blockade_codes(M: int) -> np.ndarray:
    codes = np.arange(1 << M, dtype=np.int64)
    wrap = (codes & 1) << (M - 1)
    ok = (codes & ((codes >> 1) | wrap)) == 0
    return codes[ok]


def pxp_basis(M: int, blockade: bool = True) -> ChainBasis:
    cfg = SpinChainConfig(twoJ=1, N=M)
    if blockade:
        return ChainBasis(cfg, blockade_codes(M), label=f"pxp-blockade")
    return full_basis(cfg)


@dataclass
class PxpChain:
    M: int
    basis: ChainBasis
    H: SparseOperator


def _constrained_flip_entries(codes: np.ndarray, M: int, site_amp):
    """COO entries of sum_i P_{i-1} O_i P_{i+1} with O a single-bit flip.

    ``site_amp(i, excited)`` gives the amplitude for flipping 0-based bit i
    whose current value is ``excited``. Both endpoints of every generated
    transition stay inside the blockade set, so index lookups always hit.
    """
    rows, cols, vals = [], [], []
    for i in range(M):
        im, ip = (i - 1) % M, (i + 1) % M
        free = ((codes >> im) & 1 == 0) & ((codes >> ip) & 1 == 0)
        src = np.nonzero(free)[0]
        if not src.size:
            continue
        flipped = codes[src] ^ (1 << i)
        dst = np.searchsorted(codes, flipped)
        ok = (dst < len(codes))
        dst_c = np.where(ok, dst, 0)
        ok &= codes[dst_c] == flipped
        excited = ((codes[src] >> i) & 1).astype(bool)
        amp = np.array([site_amp(i, bool(e)) for e in excited], dtype=complex)
        rows.append(dst_c[ok])
        cols.append(src[ok])
        vals.append(amp[ok])
    return rows, cols, vals


def build_pxp(M: int, on_blockade_basis: bool = True) -> PxpChain:
    """Constrained-flip Hamiltonian sum_i P_{i-1} sigma^x_i P_{i+1} (cyclic)."""
    if M < 3:
        raise InvalidConfigError("constrained ring needs M >= 3")
    basis = pxp_basis(M, blockade=on_blockade_basis)
    rows, cols, vals = _constrained_flip_entries(
        basis.codes, M, lambda i, excited: 1.0)
    n = basis.dim
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return PxpChain(M=M, basis=basis, H=SparseOperator(m, basis, hermitian=True))


def neel_state(M: int, basis: ChainBasis) -> np.ndarray:
    """Indicator of the alternating down-up state (bit set on even sites)."""
    code = sum(1 << (2 * l + 1) for l in range(M // 2))
    amps = np.zeros(basis.dim, dtype=complex)
    pos = basis.index_of(np.array([code]))[0]
    if pos < 0:
        raise ValueError("alternating state missing from the basis")
    amps[pos] = 1.0
    return amps


@dataclass
class MagnonOperators:
    """Staggered pi-momentum magnon operators on the blockade basis."""

    M: int
    basis: ChainBasis
    Zpi: SparseOperator
    Ypi: SparseOperator

    def s_plus(self, alpha: float) -> SparseOperator:
        m = (self.Ypi.matrix + 1j * alpha * self.Zpi.matrix) / (2 * np.sqrt(2))
        return SparseOperator(m, self.basis)

    def s_minus(self, alpha: float) -> SparseOperator:
        m = (self.Ypi.matrix - 1j * alpha * self.Zpi.matrix) / (2 * np.sqrt(2))
        return SparseOperator(m, self.basis)


def build_magnon_ops(M: int, basis: ChainBasis | None = None) -> MagnonOperators:
    """Z_pi = sum (-1)^i sigma^z_i and Y_pi = sum (-1)^i P sigma^y_i P.

    Site parity uses 1-based site numbering (site i = bit i-1). Requires an
    even ring so the staggering is consistent across the boundary.
    """
    if M % 2 != 0:
        raise InvalidConfigError("staggered magnon operators need even M")
    if basis is None:
        basis = pxp_basis(M)
    codes = basis.codes
    parity = np.array([(-1) ** (i + 1) for i in range(M)], dtype=float)
    zdiag = np.zeros(basis.dim)
    for i in range(M):
        zi = 2.0 * ((codes >> i) & 1) - 1.0
        zdiag += parity[i] * zi
    Zpi = SparseOperator(sp.diags(zdiag.astype(complex)), basis, hermitian=True)

    def amp(i, excited):
        # <0|sigma^y|1> = +i (lowering), <1|sigma^y|0> = -i (raising)
        return parity[i] * (1j if excited else -1j)

    rows, cols, vals = _constrained_flip_entries(codes, M, amp)
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )
    Ypi = SparseOperator(m, basis, hermitian=True)
    return MagnonOperators(M=M, basis=basis, Zpi=Zpi, Ypi=Ypi)


# ---------------------------------------------------------------------------
# spin-1 <-> blockade-ring correspondence
# ---------------------------------------------------------------------------

@dataclass
class Isometry:
    """Basis bijection between the spin-1 zero-pattern sector and the ring."""

    source: Sector            # spin-1 C=0 sector (N sites)
    target: ChainBasis        # blockade ring basis (2N sites)
    permutation: np.ndarray   # target position of each source state

    def map_state(self, amps: np.ndarray) -> np.ndarray:
        out = np.zeros(self.target.dim, dtype=complex)
        out[self.permutation] = np.asarray(amps, dtype=complex)
        return out

    def pull_state(self, amps: np.ndarray) -> np.ndarray:
        return np.asarray(amps, dtype=complex)[self.permutation]

    def map_operator(self, op: SparseOperator) -> SparseOperator:
        P = sp.csr_matrix(
            (np.ones(len(self.permutation)),
             (self.permutation, np.arange(len(self.permutation)))),
            shape=(self.target.dim, len(self.permutation)),
        )
        return SparseOperator(P @ op.matrix @ P.T, self.target,
                              hermitian=op.hermitian)

    def pull_operator(self, op: SparseOperator, source_basis: ChainBasis) -> SparseOperator:
        P = sp.csr_matrix(
            (np.ones(len(self.permutation)),
             (self.permutation, np.arange(len(self.permutation)))),
            shape=(self.target.dim, len(self.permutation)),
        )
        return SparseOperator(P.T @ op.matrix @ P, source_basis,
                              hermitian=op.hermitian)


def spin1_codes_to_ring(codes: np.ndarray, N: int) -> np.ndarray:
    """Apply the pair dictionary to spin-1 digit codes (digit = m+1)."""
    digits = digits_of(codes, 3, N)
    out = np.zeros(len(codes), dtype=np.int64)
    for l in range(N):
        g = digits[:, l]
        out |= (g == 2).astype(np.int64) << (2 * l + 1)
        out |= (g == 0).astype(np.int64) << (2 * l)
    return out


def spin1_to_pxp(cfg: SpinChainConfig, sector: Sector | None = None) -> Isometry:
    """Bijection from the spin-1 zero-pattern sector onto the 2N ring."""
    if cfg.twoJ != 2:
        raise InvalidConfigError("the pair dictionary requires a spin-1 chain")
    if sector is None:
        from .sectors import decompose_by_C

        sector = [s for s in decompose_by_C(cfg) if s.label["C"] == 0][0]
    target = pxp_basis(2 * cfg.N)
    ring = spin1_codes_to_ring(sector.codes, cfg.N)
    perm = target.index_of(ring)
    if np.any(perm < 0) or len(np.unique(perm)) != sector.dim \
            or sector.dim != target.dim:
        raise RuntimeError("pair dictionary failed to produce a bijection")
    return Isometry(source=sector, target=target, permutation=perm)


def build_spin1_LR_form(cfg: SpinChainConfig, basis: ChainBasis | None = None) -> SparseOperator:
    """(1/sqrt2) sum_l R_l R^2_{l+1} + L^2_l L_{l+1} for the spin-1 chain."""
    from .operators import embed_two_site

    if cfg.twoJ != 2:
        raise InvalidConfigError("the L/R decomposition is specific to spin 1")
    if basis is None:
        basis = full_basis(cfg)
    L = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
    R = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    w = 1.0 / np.sqrt(2.0)
    H = embed_two_site(w * R, R @ R, 1, basis) + embed_two_site(w * L @ L, L, 1, basis)
    for site in range(2, cfg.N + 1):
        H = H + embed_two_site(w * R, R @ R, site, basis)
        H = H + embed_two_site(w * L @ L, L, site, basis)
    return SparseOperator(H.matrix, basis, hermitian=True)
