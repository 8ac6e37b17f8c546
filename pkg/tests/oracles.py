"""Independent dense brute-force constructions used as test oracles.

Everything here is built with plain Kronecker products and explicit loops,
sharing no code with the package internals. Index order matches the package
packing (site 1 least significant, digit = m + j) so matrices can be
compared element-wise.
"""

import numpy as np
from functools import reduce


def spin_mats(twoJ):
    """(Sx, Sy, Sz) in digit order: index 0 = m=-j."""
    j = twoJ / 2.0
    d = twoJ + 1
    m = np.arange(d) - j  # digit order
    Sz = np.diag(m).astype(complex)
    Sp = np.zeros((d, d), dtype=complex)
    for k in range(d - 1):
        # raise digit k -> k+1, m -> m+1
        Sp[k + 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    Sm = Sp.conj().T
    return (Sp + Sm) / 2, (Sp - Sm) / 2j, Sz


def digit_proj(twoJ, digit):
    d = twoJ + 1
    P = np.zeros((d, d), dtype=complex)
    P[digit, digit] = 1.0
    return P


def kron_sites(ops_digit):
    """ops_digit[l] acts on site l+1; site 1 least significant."""
    return reduce(np.kron, reversed(list(ops_digit)))


def one_site(op, site1, N, d):
    ops = [np.eye(d, dtype=complex)] * N
    ops[site1 - 1] = op
    return kron_sites(ops)


def two_site(opA, opB, site1, N, d):
    ops = [np.eye(d, dtype=complex)] * N
    ops[site1 - 1] = opA
    ops[site1 % N] = opB
    return kron_sites(ops)


def counting_op(twoJ, N):
    d = twoJ + 1
    Pj = digit_proj(twoJ, d - 1)
    Pmj = digit_proj(twoJ, 0)
    return sum(two_site(Pj, Pmj, l, N, d) for l in range(1, N + 1))


def collective(alpha, twoJ, N):
    d = twoJ + 1
    S = spin_mats(twoJ)["xyz".index(alpha)]
    return sum(one_site(S, l, N, d) for l in range(1, N + 1))


def unitary(theta, twoJ, N):
    C = counting_op(twoJ, N)
    return np.diag(np.exp(1j * theta * np.real(np.diag(C))))


def hamiltonian_conjugated(a, theta, twoJ, N):
    """U(theta) [ (1+a)/2 Jx + (1-a)/2 Upi Jx Upi ] U(-theta)."""
    Jx = collective("x", twoJ, N)
    cdiag = np.real(np.diag(counting_op(twoJ, N)))
    sign = np.where(np.round(cdiag).astype(int) % 2 == 0, 1.0, -1.0)
    Ha = (1 + a) / 2 * Jx + (1 - a) / 2 * (sign[:, None] * Jx * sign[None, :])
    ph = np.exp(1j * theta * cdiag)
    return ph[:, None] * Ha * ph.conj()[None, :]


def hamiltonian_local(a, theta, twoJ, N):
    """The two-term local construction (digit order throughout)."""
    d = twoJ + 1
    c = a * np.exp(1j * theta)
    j = twoJ / 2.0
    w = np.sqrt(j / 2.0)
    Sx = spin_mats(twoJ)[0]
    H = sum(one_site(Sx, l, N, d) for l in range(1, N + 1)).astype(complex)
    up_top = np.zeros((d, d), dtype=complex)
    up_top[d - 1, d - 2] = 1.0  # |j><j-1| in digit order
    dn_bot = np.zeros((d, d), dtype=complex)
    dn_bot[0, 1] = 1.0          # |-j><-j+1|
    A = (c - 1) * up_top + np.conj(c - 1) * up_top.conj().T
    B = (c - 1) * dn_bot + np.conj(c - 1) * dn_bot.conj().T
    Pj = digit_proj(twoJ, d - 1)
    Pmj = digit_proj(twoJ, 0)
    for l in range(1, N + 1):
        H += w * two_site(A, Pmj, l, N, d)
        H += w * two_site(Pj, B, l, N, d)
    return H


def sigma_form_halfspin(a, N):
    """(a/2) sum sx + (a-1)/4 sum (sz sx - sx sz) with PBC."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)  # digit order: 0 = down
    H = a / 2 * sum(one_site(sx, l, N, 2) for l in range(1, N + 1))
    for l in range(1, N + 1):
        H += (a - 1) / 4 * (two_site(sz, sx, l, N, 2) - two_site(sx, sz, l, N, 2))
    return H


def count_patterns_brute(code, d, N):
    digits = [(code // d ** l) % d for l in range(N)]
    return sum(
        1 for l in range(N)
        if digits[l] == d - 1 and digits[(l + 1) % N] == 0
    )


def transfer_matrix_count(d, N):
    """tr(T^N) with the (+j -> -j) adjacency forbidden."""
    T = np.ones((d, d))
    T[d - 1, 0] = 0.0  # row = digit at site l, column = digit at site l+1
    return int(round(np.trace(np.linalg.matrix_power(T, N))))


def blockade_ring_count(M):
    """Brute-force count of cyclic bit strings without adjacent ones."""
    n = 0
    for s in range(1 << M):
        if s & ((s >> 1) | ((s & 1) << (M - 1))):
            continue
        n += 1
    return n


def entropy_brute(amps, d, N, cut):
    """Reduced density matrix of sites 1..cut built by explicit summation."""
    dA = d ** cut
    dB = d ** (N - cut)
    rho = np.zeros((dA, dA), dtype=complex)
    amps = np.asarray(amps).reshape(dB, dA)  # row: high sites, col: low sites
    for b in range(dB):
        rho += np.outer(amps[b], amps[b].conj())
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))
