"""Sparse operators over an explicit basis, and their algebra.

Local d x d matrices use the physics row order m = +j, j-1, ..., -j
(so ``Sz = diag(j, ..., -j)``). The packing digit of a basis code is
m + j, i.e. the *reverse* order; embedding routines convert internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .basis import BasisMismatchError, ChainBasis
from .config import InvalidConfigError, SpinChainConfig

STORED_ZERO = 1e-15
HERMITIAN_TOL = 1e-12


def local_spin_matrices(twoJ: int) -> dict:
    """Spin-j matrices and local projectors for local dimension d = twoJ+1.

    Returns Sx, Sy, Sz, Splus, Sminus and ``projector(2m)`` entries keyed
    by the integer 2m. Matrix element convention:
    <m+1|S+|m> = sqrt(j(j+1) - m(m+1)).
    """
    if twoJ < 1:
        raise InvalidConfigError(f"twoJ must be >= 1, got {twoJ}")
    j = twoJ / 2.0
    d = twoJ + 1
    m = j - np.arange(d)
    Sz = np.diag(m).astype(complex)
    Sp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        Sp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    Sm = Sp.conj().T
    out = {
        "Sx": (Sp + Sm) / 2,
        "Sy": (Sp - Sm) / 2j,
        "Sz": Sz,
        "Splus": Sp,
        "Sminus": Sm,
    }
    for k in range(d):
        P = np.zeros((d, d), dtype=complex)
        P[k, k] = 1.0
        out[("projector", int(round(2 * m[k])))] = P
    return out


def projector(twoJ: int, m_twice: int) -> np.ndarray:
    """Local projector |m><m| with m given as the integer 2m."""
    return local_spin_matrices(twoJ)[("projector", m_twice)]


def _to_digit_order(op: np.ndarray) -> np.ndarray:
    # physics row order (m = +j first) -> packing digit order (m = -j first)
    return op[::-1, ::-1]


@dataclass
class SparseOperator:
    """CSR matrix tied to a basis, with an optional Hermiticity guarantee."""

    matrix: sp.csr_matrix
    basis: ChainBasis
    hermitian: bool = False

    def __post_init__(self):
        m = self.matrix.tocsr().astype(complex)
        if m.nnz:
            m.data[np.abs(m.data) < STORED_ZERO] = 0.0
            m.eliminate_zeros()
            m.sum_duplicates()
        self.matrix = m
        if self.hermitian:
            dev = _herm_deviation(m)
            scale = max(np.abs(m.data).max() if m.nnz else 0.0, 1.0e-300)
            if dev > HERMITIAN_TOL * scale:
                raise ValueError(
                    f"operator marked hermitian but max|A - A^H| = {dev:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    # -- algebra ------------------------------------------------------------

    def _check(self, other: "SparseOperator"):
        if not self.basis.same_as(other.basis):
            raise BasisMismatchError("operators live on different bases")

    def __add__(self, other):
        self._check(other)
        return SparseOperator(self.matrix + other.matrix, self.basis,
                              hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other):
        self._check(other)
        return SparseOperator(self.matrix - other.matrix, self.basis,
                              hermitian=self.hermitian and other.hermitian)

    def scale(self, z) -> "SparseOperator":
        herm = self.hermitian and abs(complex(z).imag) == 0.0
        return SparseOperator(self.matrix * z, self.basis, hermitian=herm)

    def __mul__(self, z):
        return self.scale(z)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return SparseOperator(self.matrix @ other.matrix, self.basis)

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T.tocsr(), self.basis,
                              hermitian=self.hermitian)

    def matvec(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Apply the operator to a vector.

        With ``out`` supplied and numba enabled this is allocation-free; the
        numpy fallback and the out-less form allocate.
        """
        m = self.matrix
        if out is None:
            out = np.empty(m.shape[0], dtype=complex)
        v = np.asarray(v, dtype=complex)
        if _kernels.USE_NUMBA:
            _kernels.csr_matvec(m.data, m.indices, m.indptr, v, out)
        else:
            out[:] = m @ v
        return out

    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.matrix.data)) if self.nnz else 0.0

    def operator_norm_estimate(self, iters: int = 60, seed: int = 0) -> float:
        """Power-iteration estimate of the spectral norm ||A||_2."""
        if self.nnz == 0:
            return 0.0
        rng = np.random.default_rng(seed)
        v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        v /= np.linalg.norm(v)
        A = self.matrix
        AH = A.conj().T.tocsr()
        est = 0.0
        for _ in range(iters):
            w = AH @ (A @ v)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                return 0.0
            est = np.sqrt(nw)
            v = w / nw
        return float(est)


def _herm_deviation(m: sp.csr_matrix) -> float:
    diff = (m - m.conj().T).tocsr()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def identity(basis: ChainBasis) -> SparseOperator:
    return SparseOperator(sp.identity(basis.dim, dtype=complex, format="csr"),
                          basis, hermitian=True)


def diagonal_operator(values, basis: ChainBasis, hermitian=None) -> SparseOperator:
    values = np.asarray(values, dtype=complex)
    herm = bool(np.abs(values.imag).max() < 1e-14) if hermitian is None else hermitian
    return SparseOperator(sp.diags(values, format="csr"), basis, hermitian=herm)


def commutator(A: SparseOperator, B: SparseOperator) -> SparseOperator:
    A._check(B)
    return SparseOperator(A.matrix @ B.matrix - B.matrix @ A.matrix, A.basis)


def anticommutator(A: SparseOperator, B: SparseOperator) -> SparseOperator:
    A._check(B)
    return SparseOperator(A.matrix @ B.matrix + B.matrix @ A.matrix, A.basis)


# ---------------------------------------------------------------------------
# embedding local operators into a chain basis
# ---------------------------------------------------------------------------

def _entries_one_site(basis: ChainBasis, site0: int, op_digit: np.ndarray):
    """COO entries of a single-site operator restricted to the basis codes.

    Transitions whose target code falls outside the basis are dropped, which
    is exact for bases closed under the operator and realizes the projected
    (P A P) restriction otherwise.
    """
    d, N = basis.cfg.d, basis.cfg.N
    codes = basis.codes
    dig = (codes // d ** site0) % d
    rows, cols, vals = [], [], []
    for r in range(d):
        for c in range(d):
            v = op_digit[r, c]
            if abs(v) < STORED_ZERO:
                continue
            src = np.nonzero(dig == c)[0]
            if not src.size:
                continue
            dst = basis.index_of(codes[src] + (r - c) * d ** site0)
            ok = dst >= 0
            rows.append(dst[ok])
            cols.append(src[ok])
            vals.append(np.full(int(ok.sum()), v, dtype=complex))
    return rows, cols, vals


def _entries_two_site(basis: ChainBasis, site0: int, opA_digit, opB_digit):
    d, N = basis.cfg.d, basis.cfg.N
    s2 = (site0 + 1) % N
    codes = basis.codes
    digA = (codes // d ** site0) % d
    digB = (codes // d ** s2) % d
    rows, cols, vals = [], [], []
    for rA in range(d):
        for cA in range(d):
            vA = opA_digit[rA, cA]
            if abs(vA) < STORED_ZERO:
                continue
            maskA = digA == cA
            for rB in range(d):
                for cB in range(d):
                    vB = opB_digit[rB, cB]
                    if abs(vB) < STORED_ZERO:
                        continue
                    src = np.nonzero(maskA & (digB == cB))[0]
                    if not src.size:
                        continue
                    shift = (rA - cA) * d ** site0 + (rB - cB) * d ** s2
                    dst = basis.index_of(codes[src] + shift)
                    ok = dst >= 0
                    rows.append(dst[ok])
                    cols.append(src[ok])
                    vals.append(np.full(int(ok.sum()), vA * vB, dtype=complex))
    return rows, cols, vals


def assemble(entry_groups, basis: ChainBasis, hermitian=False) -> SparseOperator:
    """Sum COO entry groups (as produced by the embed helpers) into a CSR."""
    rows = [r for g in entry_groups for r in g[0]]
    cols = [c for g in entry_groups for c in g[1]]
    vals = [v for g in entry_groups for v in g[2]]
    n = basis.dim
    if rows:
        m = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
    else:
        m = sp.csr_matrix((n, n), dtype=complex)
    return SparseOperator(m, basis, hermitian=hermitian)


def embed_one_site(op: np.ndarray, site: int, basis: ChainBasis,
                   hermitian=False) -> SparseOperator:
    """Embed a d x d matrix (physics row order) at 1-based ``site``."""
    cfg = basis.cfg
    if not 1 <= site <= cfg.N:
        raise ValueError(f"site {site} out of range 1..{cfg.N}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (cfg.d, cfg.d):
        raise ValueError(f"local operator must be {cfg.d}x{cfg.d}")
    ent = _entries_one_site(basis, site - 1, _to_digit_order(op))
    return assemble([ent], basis, hermitian=hermitian)


def embed_two_site(opA: np.ndarray, opB: np.ndarray, site: int,
                   basis: ChainBasis, hermitian=False) -> SparseOperator:
    """Embed opA at ``site`` and opB at site+1 (cyclic), 1-based."""
    cfg = basis.cfg
    if not 1 <= site <= cfg.N:
        raise ValueError(f"site {site} out of range 1..{cfg.N}")
    opA = np.asarray(opA, dtype=complex)
    opB = np.asarray(opB, dtype=complex)
    ent = _entries_two_site(basis, site - 1, _to_digit_order(opA),
                            _to_digit_order(opB))
    return assemble([ent], basis, hermitian=hermitian)


def collective_operator(op: np.ndarray, basis: ChainBasis,
                        hermitian=False) -> SparseOperator:
    """Sum of the same single-site operator over every site."""
    groups = [
        _entries_one_site(basis, l, _to_digit_order(np.asarray(op, dtype=complex)))
        for l in range(basis.cfg.N)
    ]
    return assemble(groups, basis, hermitian=hermitian)
