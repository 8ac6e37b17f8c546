"""Quench dynamics: fidelity trajectories and revival metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .basis import ChainBasis, full_basis
from .config import SpinChainConfig
from .model import lowest_x_state, product_state
from .operators import SparseOperator
from .spectral import SpectralData, diagonalize


class StepFailureError(RuntimeError):
    """Krylov propagation could not meet the tolerance at the maximal subspace."""


@dataclass
class Trajectory:
    times: np.ndarray
    fidelity: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    method: str = "eigenbasis"
    meta: dict = field(default_factory=dict)


def initial_state(cfg: SpinChainConfig, kind: str,
                  basis: ChainBasis | None = None,
                  sector=None, custom: np.ndarray | None = None):
    """Normalized product initial state on the (full) chain basis.

    kinds: ``all-up-z`` (every site at m=+j), ``all-down-x`` (every site in
    the lowest S^x eigenstate), ``custom`` (amplitudes supplied). Returns the
    full-basis amplitudes, or ``(full, projected)`` when a sector is given.
    """
    basis = full_basis(cfg) if basis is None else basis
    if kind == "all-up-z":
        code = sum(cfg.twoJ * cfg.d ** l for l in range(cfg.N))
        amps = np.zeros(basis.dim, dtype=complex)
        pos = basis.index_of(np.array([code]))[0]
        if pos < 0:
            raise ValueError("all-up-z state not contained in the basis")
        amps[pos] = 1.0
    elif kind == "all-down-x":
        amps = product_state(lowest_x_state(cfg.twoJ), basis)
        amps /= np.linalg.norm(amps)
    elif kind == "custom":
        if custom is None:
            raise ValueError("custom kind requires amplitudes")
        amps = np.asarray(custom, dtype=complex)
        if len(amps) != basis.dim:
            raise ValueError("custom amplitudes have the wrong length")
        amps = amps / np.linalg.norm(amps)
    else:
        raise ValueError(f"unknown initial-state kind {kind!r}")
    # fix the global phase: first nonzero amplitude real nonnegative
    nz = np.nonzero(np.abs(amps) > 1e-14)[0]
    if nz.size:
        amps = amps * np.exp(-1j * np.angle(amps[nz[0]]))
        amps = np.where(np.abs(amps.imag) < 1e-15, amps.real + 0j, amps)
    if sector is not None:
        return amps, sector.project_state(amps)
    return amps


def evolve(psi0: np.ndarray, H: SparseOperator, times,
           method: str = "eigenbasis", spectral: SpectralData | None = None,
           tol: float = 1e-8, max_krylov: int = 60) -> Trajectory:
    """Unitary evolution of psi0 under H sampled on a time grid.

    ``eigenbasis`` expands in a full eigendecomposition (computed on demand,
    subject to the dense cap); ``krylov`` uses a Lanczos propagator with a
    per-step error estimate bounded by ``tol``.
    """
    times = np.asarray(times, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    n0 = np.linalg.norm(psi0)
    if abs(n0 - 1.0) > 1e-8:
        psi0 = psi0 / n0
    if method == "eigenbasis":
        if spectral is None or spectral.eigenvectors is None:
            spectral = diagonalize(H, mode="dense")
        V = spectral.eigenvectors
        E = spectral.eigenvalues
        amps = V.conj().T @ psi0
        w = np.abs(amps) ** 2
        phases = np.exp(-1j * np.outer(times, E))
        fid = np.abs(phases @ w) ** 2
        energy = np.full(len(times), float(np.real(w @ E)))
        norm = np.full(len(times), float(w.sum()))
        return Trajectory(times, fid, energy, norm, method="eigenbasis",
                          meta={"sector": spectral.sector_label})
    if method == "krylov":
        return _evolve_krylov(psi0, H, times, tol, max_krylov)
    raise ValueError(f"unknown method {method!r}")


def _lanczos_step(H: SparseOperator, v: np.ndarray, dt: float, tol: float,
                  m_max: int):
    """Propagate v by exp(-i dt H) in a Krylov subspace.

    Returns (new vector, error estimate, subspace size). The estimate is the
    weight the small-problem propagator puts on the last Lanczos vector,
    scaled by the next off-diagonal coefficient - the standard a-posteriori
    bound. Full reorthogonalization keeps the basis clean at these sizes.
    """
    import scipy.linalg as sla

    n = len(v)
    m_max = min(m_max, n)
    Vb = np.empty((n, m_max), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    Vb[:, 0] = v
    w = np.empty(n, dtype=complex)
    m_used = m_max
    err = np.inf
    for m in range(m_max):
        H.matvec(Vb[:, m], out=w)
        a = float(np.real(np.vdot(Vb[:, m], w)))
        alpha[m] = a
        w -= a * Vb[:, m]
        if m > 0:
            w -= beta[m - 1] * Vb[:, m - 1]
        # full reorthogonalization
        w -= Vb[:, : m + 1] @ (Vb[:, : m + 1].conj().T @ w)
        b = float(np.linalg.norm(w))
        beta[m] = b
        if m >= 3 or b < 1e-14:
            T = np.diag(alpha[: m + 1]) + np.diag(beta[:m], 1) + np.diag(beta[:m], -1)
            u = sla.expm(-1j * dt * T)[:, 0]
            err = b * abs(u[-1]) * abs(dt)
            if err <= tol or b < 1e-14:
                m_used = m + 1
                break
        if m + 1 < m_max:
            Vb[:, m + 1] = w / b
    else:
        m_used = m_max
    if err > tol and beta[m_used - 1] >= 1e-14:
        raise StepFailureError(
            f"Krylov error estimate {err:.2e} > tol {tol:.1e} at subspace {m_used}"
        )
    T = np.diag(alpha[:m_used]) + np.diag(beta[: m_used - 1], 1) \
        + np.diag(beta[: m_used - 1], -1)
    u = sla.expm(-1j * dt * T)[:, 0]
    return Vb[:, :m_used] @ u, err, m_used


def _evolve_krylov(psi0, H, times, tol, max_krylov):
    if not H.hermitian:
        raise ValueError("krylov evolution requires a Hermitian operator")
    fid = np.empty(len(times))
    energy = np.empty(len(times))
    norm = np.empty(len(times))
    errs = []
    v = psi0.copy()
    t_prev = 0.0
    Hv = np.empty(len(v), dtype=complex)
    for i, t in enumerate(times):
        dt = t - t_prev
        if abs(dt) > 0:
            v, err, _ = _lanczos_step(H, v, dt, tol, max_krylov)
            errs.append(err)
        t_prev = t
        fid[i] = abs(np.vdot(psi0, v)) ** 2
        H.matvec(v, out=Hv)
        energy[i] = float(np.real(np.vdot(v, Hv)))
        norm[i] = float(np.linalg.norm(v) ** 2)
    return Trajectory(np.asarray(times, float), fid, energy, norm,
                      method="krylov",
                      meta={"tol": tol, "max_step_error": max(errs, default=0.0)})


def revival_metrics(traj: Trajectory, prominence: float = 0.05) -> dict:
    """Peak detection on the fidelity series.

    Returns peak times/values, the median peak gap as the period estimate,
    and the least-squares slope of log peak values as the damping rate. With
    fewer than three peaks the result is flagged partial.
    """
    peaks, _ = find_peaks(traj.fidelity, prominence=prominence)
    out = {
        "peak_times": traj.times[peaks],
        "peak_values": traj.fidelity[peaks],
        "n_peaks": int(len(peaks)),
        "partial": bool(len(peaks) < 3),
        "period_estimate": None,
        "damping_rate": None,
    }
    if len(peaks) >= 2:
        out["period_estimate"] = float(np.median(np.diff(traj.times[peaks])))
    if len(peaks) >= 2:
        logs = np.log(np.maximum(traj.fidelity[peaks], 1e-300))
        slope = np.polyfit(traj.times[peaks], logs, 1)[0]
        out["damping_rate"] = float(-slope)
    return out
