"""Fragmentation of the chain Hilbert space and operator restriction.

Three levels of structure: pattern-count sectors (exact integers, computed
by digit scan), frozen-pattern subsectors inside each nonzero count, and
translation-symmetry momentum blocks of translation-closed sectors.
Connectivity components provide the model-free oracle for fragmentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .basis import BasisMismatchError, ChainBasis, full_basis, translate_codes
from .config import SpinChainConfig
from .operators import SparseOperator


class SectorError(ValueError):
    pass


@dataclass
class Sector:
    """A fragment of a parent basis.

    For plain sectors ``codes`` are the member product-state codes; for
    momentum sectors they are the canonical (smallest-code) orbit
    representatives and ``periods`` holds each orbit's translation period.
    """

    label: dict
    cfg: SpinChainConfig
    codes: np.ndarray
    parent_codes: np.ndarray
    kind: str = "plain"  # "plain" | "momentum"
    k: int | None = None
    periods: np.ndarray | None = None
    _isometry: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.codes)

    def chain_basis(self) -> ChainBasis:
        """Basis view usable for building operators (plain sectors only)."""
        if self.kind != "plain":
            raise SectorError("momentum sectors have no product-state basis")
        return ChainBasis(self.cfg, self.codes, label=label_text(self.label))

    def block_basis(self) -> ChainBasis:
        """Identifier basis for operators restricted to this sector."""
        return ChainBasis(self.cfg, self.codes, label=label_text(self.label))

    def isometry(self) -> sp.csr_matrix:
        """(dim x parent_dim) matrix with orthonormal rows.

        Restriction of a parent operator is V A V+; projection of a parent
        state is V psi; lifting is V+ w.
        """
        if self._isometry is not None:
            return self._isometry
        n_par = len(self.parent_codes)
        if self.kind == "plain":
            pos = np.searchsorted(self.parent_codes, self.codes)
            if np.any(self.parent_codes[pos] != self.codes):
                raise SectorError("sector codes missing from parent basis")
            V = sp.csr_matrix(
                (np.ones(self.dim), (np.arange(self.dim), pos)),
                shape=(self.dim, n_par),
            )
        else:
            d, N = self.cfg.d, self.cfg.N
            rows, cols, vals = [], [], []
            for i, (rep, p) in enumerate(zip(self.codes, self.periods)):
                code = np.int64(rep)
                for r in range(p):
                    pos = int(np.searchsorted(self.parent_codes, code))
                    if self.parent_codes[pos] != code:
                        raise SectorError("orbit leaves the parent basis")
                    rows.append(i)
                    cols.append(pos)
                    vals.append(np.exp(-2j * np.pi * self.k * r / N) / np.sqrt(p))
                    code = translate_codes(np.array([code]), d, N)[0]
            V = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, n_par))
        self._isometry = V
        return V

    def project_state(self, parent_amps: np.ndarray) -> np.ndarray:
        return self.isometry() @ np.asarray(parent_amps, dtype=complex)

    def lift_state(self, amps: np.ndarray) -> np.ndarray:
        """Sector coordinates -> parent-basis amplitudes."""
        return self.isometry().conj().T @ np.asarray(amps, dtype=complex)


def label_text(label: dict) -> str:
    return ",".join(f"{k}={label[k]}" for k in sorted(label))


def decompose_by_C(cfg: SpinChainConfig,
                   basis: ChainBasis | None = None) -> list:
    """Split a basis into pattern-count sectors (one per occurring count)."""
    basis = full_basis(cfg) if basis is None else basis
    counts = basis.pattern_counts()
    sectors = []
    for c in np.unique(counts):
        codes = basis.codes[counts == c]
        sectors.append(Sector(label={"kind": "C", "C": int(c)}, cfg=cfg,
                              codes=codes, parent_codes=basis.codes))
    return sectors


def frozen_pattern_subsectors(sector: Sector, cfg: SpinChainConfig) -> list:
    """Partition a C > 0 sector by the exact set of pattern positions."""
    if sector.label.get("kind") != "C" or sector.label.get("C", 0) <= 0:
        raise SectorError("frozen-pattern refinement applies to C > 0 sectors")
    masks = _kernels.pattern_bitmask(sector.codes, cfg.d, cfg.N)
    out = []
    for mval in np.unique(masks):
        codes = sector.codes[masks == mval]
        positions = tuple(l + 1 for l in range(cfg.N) if (int(mval) >> l) & 1)
        out.append(Sector(
            label={"kind": "frozen", "C": sector.label["C"], "positions": positions},
            cfg=cfg, codes=codes, parent_codes=sector.parent_codes,
        ))
    return out


def _translation_closed(codes: np.ndarray, cfg: SpinChainConfig) -> bool:
    shifted = np.sort(translate_codes(codes, cfg.d, cfg.N))
    return bool(np.array_equal(shifted, codes))


def momentum_sectors(parent, cfg: SpinChainConfig) -> list:
    """Symmetry-adapted momentum blocks k = 0..N-1 of a translation-closed set.

    Orbit representatives are the smallest codes in each orbit; an orbit of
    period p enters block k iff k*p = 0 mod N. Frozen-pattern subsectors are
    rejected (translation moves the pattern).
    """
    if isinstance(parent, Sector):
        if parent.kind != "plain":
            raise SectorError("cannot momentum-resolve a momentum sector")
        codes = parent.codes
        base_label = dict(parent.label)
    elif isinstance(parent, ChainBasis):
        codes = parent.codes
        base_label = {"kind": "basis", "name": parent.label}
    else:
        raise TypeError("parent must be a Sector or ChainBasis")
    if not _translation_closed(codes, cfg):
        raise SectorError("parent set is not closed under translation")
    mins, periods = _kernels.orbit_scan(codes, cfg.d, cfg.N)
    rep_mask = mins == codes
    reps = codes[rep_mask]
    per = periods[rep_mask]
    out = []
    for k in range(cfg.N):
        keep = (k * per) % cfg.N == 0
        label = dict(base_label)
        label["k"] = k
        out.append(Sector(label=label, cfg=cfg, codes=reps[keep],
                          parent_codes=codes, kind="momentum", k=k,
                          periods=per[keep]))
    return out


def project_operator(op: SparseOperator, sector: Sector) -> SparseOperator:
    """Restrict a parent-basis operator to the sector block."""
    if not np.array_equal(op.basis.codes, sector.parent_codes):
        raise BasisMismatchError("operator basis does not match sector parent")
    V = sector.isometry()
    block = (V @ op.matrix @ V.conj().T).tocsr()
    herm = op.hermitian
    return SparseOperator(block, sector.block_basis(), hermitian=herm)


def connectivity_fragments(H: SparseOperator) -> list:
    """Connected components of the off-diagonal coupling graph of H."""
    m = H.matrix.tocoo()
    keep = m.row != m.col
    graph = sp.csr_matrix(
        (np.ones(int(keep.sum())), (m.row[keep], m.col[keep])),
        shape=m.shape,
    )
    n_comp, labels = connected_components(graph, directed=False)
    cfg = H.basis.cfg
    out = []
    for i in range(n_comp):
        codes = H.basis.codes[labels == i]
        out.append(Sector(label={"kind": "component", "id": int(i)}, cfg=cfg,
                          codes=np.sort(codes), parent_codes=H.basis.codes))
    # deterministic order: by size descending, then smallest member code
    out.sort(key=lambda s: (-s.dim, int(s.codes[0])))
    for i, s in enumerate(out):
        s.label["id"] = i
    return out


def lift_to_full(amps: np.ndarray, sector: Sector, cfg: SpinChainConfig) -> np.ndarray:
    """Sector coordinates -> full-chain amplitudes (parent must be full-chain codes)."""
    parent_amps = sector.lift_state(amps)
    full = np.zeros(cfg.dim, dtype=complex)
    full[sector.parent_codes] = parent_amps
    return full


def sector_manifest(sectors, max_rep_codes: int = 16) -> list:
    """JSON-ready summary: label, dimension, leading representative codes."""
    out = []
    for s in sectors:
        out.append({
            "label": {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in s.label.items()},
            "kind": s.kind,
            "dim": int(s.dim),
            "representative_codes": [int(c) for c in s.codes[:max_rep_codes]],
        })
    return out
