"""Independent reference implementations used to cross-check the package.

These share no code with ``nearfield``: the hyperfine Hamiltonian is built
with the nuclear spin as the outer tensor factor and diagonalized
numerically, and the coupled states come from a separate recursion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm


def ladder(j: float):
    """(Jz, J+, J-) for spin j on |m> ordered m = -j .. +j."""
    ms = np.arange(-j, j + 1)
    jz = np.diag(ms)
    jp = np.zeros((ms.size, ms.size))
    for k in range(ms.size - 1):
        m = ms[k]
        jp[k + 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
    return jz, jp, jp.T


def hyperfine_hamiltonian(A: float, gJ: float, gI: float, I: float, muB: float, B: float) -> np.ndarray:
    """A I.J + muB B (gJ Jz + gI Iz) for J = 1/2, basis |m_I> (x) |m_J>."""
    iz, ip, im = ladder(I)
    jz, jp, jm = ladder(0.5)
    ei, ej = np.eye(iz.shape[0]), np.eye(2)
    idotj = np.kron(iz, jz) + 0.5 * (np.kron(ip, jm) + np.kron(im, jp))
    zee = gJ * np.kron(ei, jz) + gI * np.kron(iz, ej)
    return A * idotj + muB * B * zee


def hyperfine_energies(c, B: float) -> np.ndarray:
    """Sorted eigenvalues of the full 16x16 matrix, in Hz."""
    h = hyperfine_hamiltonian(c.hyperfine_constant_A, c.g_J, c.g_I, c.nuclear_spin_I,
                              c.bohr_frequency_per_gauss, B)
    return np.sort(np.linalg.eigvalsh(h))


def cg_matrix(j1: float, j2: float) -> np.ndarray:
    """Clebsch-Gordan coefficients as the unitary that diagonalizes J^2.

    Rows: uncoupled |m1 m2> (m1 outer, ascending). Columns: coupled |J M>
    ordered by J ascending then M ascending, with the Condon-Shortley phase
    fixed by <j1 j1; j2 J-j1 | J J> > 0.
    """
    z1, p1, m1 = ladder(j1)
    z2, p2, m2 = ladder(j2)
    e1, e2 = np.eye(z1.shape[0]), np.eye(z2.shape[0])
    jz = np.kron(z1, e2) + np.kron(e1, z2)
    jm = np.kron(m1, e2) + np.kron(e1, m2)
    jp = jm.T
    j2op = jm @ jp + jz @ jz + jz
    cols = []
    m1s = np.arange(-j1, j1 + 1)
    m2s = np.arange(-j2, j2 + 1)
    for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
        # highest-weight state: null space of J+ with Jz = J and J^2 = J(J+1)
        idx = [a * m2s.size + b for a, m in enumerate(m1s) for b, n in enumerate(m2s) if abs(m + n - J) < 1e-9]
        sub = (j2op - J * (J + 1) * np.eye(jz.shape[0]))[:, idx]
        _, _, vh = np.linalg.svd(sub)
        top = np.zeros(jz.shape[0])
        top[idx] = vh[-1]
        lead = [i for i in idx if abs(m1s[i // m2s.size] - j1) < 1e-9]
        if top[lead[0]] < 0:
            top = -top
        states = [top]
        for M in np.arange(J, -J, -1):
            v = jm @ states[-1] / math.sqrt(J * (J + 1) - M * (M - 1))
            states.append(v)
        cols.extend(reversed(states))
    return np.array(cols).T


def cg_lookup(j1: float, j2: float):
    """Function (m1, m2, J, M) -> coefficient from :func:`cg_matrix`."""
    u = cg_matrix(j1, j2)
    n2 = int(round(2 * j2 + 1))
    col = {}
    k = 0
    for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
        for M in np.arange(-J, J + 1):
            col[(round(2 * J), round(2 * M))] = k
            k += 1

    def f(m1, m2, J, M):
        if abs(m1 + m2 - M) > 1e-9 or abs(M) > J:
            return 0.0
        row = int(round(m1 + j1)) * n2 + int(round(m2 + j2))
        return float(u[row, col[(round(2 * J), round(2 * M))]])

    return f


def two_level_probability(omega: float, delta: float, t: float) -> float:
    """Upper-state population from exponentiating the 2x2 RWA Hamiltonian."""
    h = 2 * math.pi * np.array([[0.0, omega / 2], [omega / 2, delta]])
    psi = expm(-1j * h * t) @ np.array([1.0, 0.0])
    return float(abs(psi[1]) ** 2)


def dipole_magnitudes(c, B: float) -> dict[tuple[tuple[int, int], tuple[int, int]], float]:
    """|<3, m'| mu_q |4, m>| for every allowed pair, normalized to the
    zero-field (4,0)<->(3,0) element.

    Labels come from m_F blocks: with A < 0 the lower of each pair of
    levels sharing m_F is F=4.
    """
    I = c.nuclear_spin_I

    def states(field):
        h = hyperfine_hamiltonian(c.hyperfine_constant_A, c.g_J, c.g_I, I, c.bohr_frequency_per_gauss, field)
        iz, _, _ = ladder(I)
        jz, _, _ = ladder(0.5)
        fz = np.diag(np.kron(iz, np.eye(2)) + np.kron(np.eye(iz.shape[0]), jz))
        out = {}
        for m in range(-int(I + 0.5), int(I + 0.5) + 1):
            idx = np.flatnonzero(np.abs(fz - m) < 1e-9)
            w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
            order = np.argsort(w)
            labels = [4] if len(idx) == 1 else ([4, 3] if c.hyperfine_constant_A < 0 else [3, 4])
            for F, k in zip(labels, order):
                vec = np.zeros(h.shape[0])
                vec[idx] = v[:, k]
                out[(F, m)] = vec
        return out

    iz, ip, im = ladder(I)
    jz, jp, jm = ladder(0.5)
    ei, ej = np.eye(iz.shape[0]), np.eye(2)
    mu_z = c.g_J * np.kron(ei, jz) + c.g_I * np.kron(iz, ej)
    mu_p = c.g_J * np.kron(ei, jp) + c.g_I * np.kron(ip, ej)
    ops = {0: mu_z, 1: -mu_p / math.sqrt(2), -1: mu_p.T / math.sqrt(2)}

    zero = states(0.0)
    ref = abs(zero[(3, 0)] @ ops[0] @ zero[(4, 0)])
    s = states(B)
    out = {}
    for m in range(-4, 5):
        for q in (-1, 0, 1):
            if abs(m + q) <= 3:
                out[((4, m), (3, m + q))] = abs(s[(3, m + q)] @ ops[q] @ s[(4, m)]) / ref
    return out
