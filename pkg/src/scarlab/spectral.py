"""Exact diagonalization and level-spacing statistics.

The r-statistic works on raw spacings; distribution comparisons use locally
unfolded spacings (centered moving average of the spacing sequence). Both
remove exact degeneracies at 1e-10 of the spectral radius first. Reference
values for chaotic/integrable spectra come from the sampling oracles at the
bottom of the module rather than from literature constants.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .operators import SparseOperator

DEFAULT_DENSE_CAP = 12000
DEGENERACY_FACTOR = 1e-10


class DenseCapError(RuntimeError):
    """Dense diagonalization refused; split into sectors or raise the cap."""


class TooFewLevelsError(ValueError):
    pass


def dense_cap() -> int:
    return int(os.environ.get("SCARLAB_DENSE_CAP", DEFAULT_DENSE_CAP))


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray | None
    sector_label: str = ""

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def spectral_radius(self) -> float:
        e = self.eigenvalues
        return float(max(abs(e[0]), abs(e[-1]))) if len(e) else 0.0


def _residual_norms(matrix, evals, evecs, block=256):
    out = np.empty(len(evals))
    for s in range(0, len(evals), block):
        V = evecs[:, s:s + block]
        R = matrix @ V - V * evals[s:s + block][None, :]
        out[s:s + block] = np.linalg.norm(R, axis=0)
    return out


def diagonalize(op: SparseOperator, mode: str = "dense", k: int = 6,
                which: str = "SA", compute_vectors: bool = True,
                label: str = "", cap: int | None = None) -> SpectralData:
    """Full dense or extremal iterative eigensolve of a Hermitian operator.

    Dense mode refuses dimensions above the cap (env ``SCARLAB_DENSE_CAP``
    overrides) with a pointer to sector splitting. Iterative mode computes
    ``k`` extremal pairs with ARPACK's implicitly restarted Lanczos.
    """
    if not op.hermitian:
        raise ValueError("diagonalize requires an operator with the hermitian flag")
    n = op.dim
    if mode == "dense":
        limit = dense_cap() if cap is None else cap
        if n > limit:
            raise DenseCapError(
                f"dim {n} exceeds dense cap {limit}; diagonalize momentum/"
                f"pattern sectors instead or raise SCARLAB_DENSE_CAP"
            )
        dense = op.to_dense()
        if compute_vectors:
            evals, evecs = np.linalg.eigh(dense)
            res = _residual_norms(op.matrix, evals, evecs)
        else:
            evals = np.linalg.eigvalsh(dense)
            evecs, res = None, None
        return SpectralData(evals, evecs, res, sector_label=label)
    if mode in ("lanczos", "iterative"):
        k = min(k, n - 2) if n > 2 else 1
        evals, evecs = spla.eigsh(op.matrix, k=k, which=which)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        res = _residual_norms(op.matrix, evals, evecs)
        if not compute_vectors:
            evecs = None
        return SpectralData(evals, evecs, res, sector_label=label)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# spacings, unfolding, gap ratios
# ---------------------------------------------------------------------------

def _clean_spacings(evals: np.ndarray) -> tuple[np.ndarray, float, int]:
    e = np.sort(np.asarray(evals, dtype=float))
    radius = max(abs(e[0]), abs(e[-1]), 1e-300)
    s = np.diff(e)
    keep = s > DEGENERACY_FACTOR * radius
    return s[keep], radius, int((~keep).sum())


def unfolded_spacings(evals, window: int = 11, edge_trim: float = 0.05,
                      return_meta: bool = False):
    """Spacings divided by their centered moving average.

    Degenerate spacings are removed first, then ``edge_trim`` of the levels
    is dropped at each spectral edge. The moving-average window must be odd;
    at the sequence ends it shrinks symmetrically (edge padding).
    """
    if window % 2 != 1 or window < 3:
        raise ValueError("window must be an odd integer >= 3")
    e = np.sort(np.asarray(evals, dtype=float))
    nt = int(edge_trim * len(e))
    if nt:
        e = e[nt:len(e) - nt]
    if len(e) < 50:
        raise TooFewLevelsError(f"need >= 50 levels after trimming, got {len(e)}")
    s, radius, n_deg = _clean_spacings(e)
    pad = window // 2
    padded = np.pad(s, pad, mode="edge")
    mavg = np.convolve(padded, np.ones(window) / window, mode="valid")
    unfolded = s / mavg
    if return_meta:
        return unfolded, {
            "window": window,
            "edge_trim": edge_trim,
            "degenerate_spacings_removed": n_deg,
            "n_spacings": len(unfolded),
            "mean_unfolded": float(unfolded.mean()),
        }
    return unfolded


def r_statistic(evals, n_bootstrap: int = 200, seed: int = 0,
                edge_trim: float = 0.0) -> dict:
    """Consecutive-gap ratios of the raw (non-unfolded) spacing sequence."""
    e = np.sort(np.asarray(evals, dtype=float))
    nt = int(edge_trim * len(e))
    if nt:
        e = e[nt:len(e) - nt]
    if len(e) < 50:
        raise TooFewLevelsError(f"need >= 50 levels, got {len(e)}")
    s, _, n_deg = _clean_spacings(e)
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    rng = np.random.default_rng(seed)
    boots = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        boots[b] = r[rng.integers(0, len(r), len(r))].mean()
    return {
        "r_values": r,
        "r_mean": float(r.mean()),
        "r_se": float(boots.std(ddof=1)),
        "n_spacings": len(s),
        "degenerate_spacings_removed": n_deg,
    }


def pooled_r_statistic(eval_sets, n_bootstrap: int = 200, seed: int = 0) -> dict:
    """Gap ratios computed per spectrum, pooled across independent blocks."""
    parts = [r_statistic(e, n_bootstrap=2, seed=seed)["r_values"] for e in eval_sets]
    r = np.concatenate(parts)
    rng = np.random.default_rng(seed)
    boots = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        boots[b] = r[rng.integers(0, len(r), len(r))].mean()
    return {"r_values": r, "r_mean": float(r.mean()), "r_se": float(boots.std(ddof=1))}


def wigner_cdf(s):
    return 1.0 - np.exp(-np.pi * np.asarray(s) ** 2 / 4.0)


def poisson_cdf(s):
    return 1.0 - np.exp(-np.asarray(s))


def ks_distance(sample, cdf) -> float:
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    F = cdf(x)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - F), np.max(F - (grid - 1.0 / n))))


def spacing_distribution_test(spacings) -> dict:
    """Kolmogorov-Smirnov distances to the Wigner surmise and to Poisson."""
    return {
        "ks_wigner": ks_distance(spacings, wigner_cdf),
        "ks_poisson": ks_distance(spacings, poisson_cdf),
    }


def spacing_histogram(spacings, bins: int = 40, s_max: float = 4.0) -> dict:
    edges = np.linspace(0.0, s_max, bins + 1)
    dens, _ = np.histogram(np.asarray(spacings), bins=edges, density=True)
    return {"bin_edges": edges, "densities": dens}


def level_statistics(evals, window: int = 11, edge_trim: float = 0.05,
                     bins: int = 40, seed: int = 0) -> dict:
    """One-stop spacing report: unfolded spacings, r-stat, KS distances."""
    s, meta = unfolded_spacings(evals, window, edge_trim, return_meta=True)
    rs = r_statistic(evals, seed=seed, edge_trim=edge_trim)
    out = {
        "spacings": s,
        "r_mean": rs["r_mean"],
        "r_se": rs["r_se"],
        "n_spacings": rs["n_spacings"],
        "histogram": spacing_histogram(s, bins=bins),
        "unfolding": meta,
    }
    out.update(spacing_distribution_test(s))
    return out


# ---------------------------------------------------------------------------
# sampling oracles
# ---------------------------------------------------------------------------

def sample_poisson_spacings(n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).exponential(size=n)


def sample_wigner_spacings(n: int, seed: int = 0) -> np.ndarray:
    """Inverse-CDF samples of the Wigner surmise (pi/2) s exp(-pi s^2/4)."""
    u = np.random.default_rng(seed).uniform(size=n)
    return np.sqrt(-4.0 * np.log1p(-u) / np.pi)


def poisson_r_mean_oracle(n: int = 100_000, seed: int = 0) -> float:
    s = sample_poisson_spacings(n, seed)
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    return float(r.mean())


def goe_r_mean_oracle(dim: int = 1000, n_samples: int = 20, seed: int = 0) -> float:
    """Mean gap ratio of sampled GOE matrices, all spacings pooled."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n_samples):
        A = rng.normal(size=(dim, dim))
        e = np.linalg.eigvalsh((A + A.T) / 2.0)
        s = np.diff(e)
        r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
        vals.append(r)
    return float(np.concatenate(vals).mean())
