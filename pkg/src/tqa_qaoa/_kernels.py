"""Compiled statevector kernels.

All kernels act in place on a contiguous complex128 array of length
``2**n``. Qubit ``q`` pairs amplitude ``k`` (bit q clear) with ``k + 2**q``.

The cost diagonal is passed as ``(levels, level_index)`` so that the
phase ``exp(-i gamma c)`` is evaluated once per distinct eigenvalue.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def phase_table(levels, gamma):
    out = np.empty(levels.shape[0], dtype=np.complex128)
    for j in range(levels.shape[0]):
        t = gamma * levels[j]
        out[j] = complex(np.cos(t), -np.sin(t))
    return out


@njit(cache=True)
def cost_phase(psi, levels, level_index, gamma):
    # psi[z] *= exp(-i gamma c[z])
    table = phase_table(levels, gamma)
    for z in range(psi.shape[0]):
        psi[z] *= table[level_index[z]]


@njit(cache=True, fastmath=True)
def mixer(psi, beta, n):
    # exp(+i beta X) on every qubit: (a, b) -> (c a + i s b, i s a + c b)
    c = np.cos(beta)
    s = np.sin(beta)
    size = psi.shape[0]
    for q in range(n):
        m = 1 << q
        for base in range(0, size, 2 * m):
            for k in range(base, base + m):
                a = psi[k]
                b = psi[k + m]
                psi[k] = complex(c * a.real - s * b.imag, c * a.imag + s * b.real)
                psi[k + m] = complex(c * b.real - s * a.imag, c * b.imag + s * a.real)


@njit(cache=True, fastmath=True)
def unmix_with_overlap(lam, phi, beta, n):
    """Undo ``exp(+i beta X)`` on both states; return ``<lam| sum_q X_q |phi>``.

    X_q commutes with every single-qubit X rotation, so the overlap for
    qubit q can be read off from the partially rotated pair.
    """
    c = np.cos(beta)
    s = -np.sin(beta)
    re = 0.0
    im = 0.0
    size = phi.shape[0]
    for q in range(n):
        m = 1 << q
        for base in range(0, size, 2 * m):
            for k in range(base, base + m):
                a = lam[k]
                b = lam[k + m]
                x = phi[k]
                y = phi[k + m]
                re += a.real * y.real + a.imag * y.imag + b.real * x.real + b.imag * x.imag
                im += a.real * y.imag - a.imag * y.real + b.real * x.imag - b.imag * x.real
                lam[k] = complex(c * a.real - s * b.imag, c * a.imag + s * b.real)
                lam[k + m] = complex(c * b.real - s * a.imag, c * b.imag + s * a.real)
                phi[k] = complex(c * x.real - s * y.imag, c * x.imag + s * y.real)
                phi[k + m] = complex(c * y.real - s * x.imag, c * y.imag + s * x.real)
    return complex(re, im)


@njit(cache=True)
def expectation(psi, c):
    acc = 0.0
    for z in range(psi.shape[0]):
        a = psi[z]
        acc += (a.real * a.real + a.imag * a.imag) * c[z]
    return acc


@njit(cache=True)
def cost_overlap(lam, phi, c):
    # <lam| H_C |phi>
    acc = 0.0 + 0.0j
    for z in range(phi.shape[0]):
        acc += np.conj(lam[z]) * c[z] * phi[z]
    return acc


@njit(cache=True)
def qaoa_state(levels, level_index, gammas, betas, n):
    size = 1 << n
    psi = np.full(size, 1.0 / np.sqrt(size) + 0.0j)
    for i in range(gammas.shape[0]):
        cost_phase(psi, levels, level_index, gammas[i])
        mixer(psi, betas[i], n)
    return psi


@njit(cache=True)
def energy_and_gradient(c, levels, level_index, gammas, betas, n):
    """Adjoint sweep; returns (<H_C>, dE/dgamma, dE/dbeta).

    The forward state is uncomputed layer by layer alongside the adjoint
    state instead of being stored, so memory stays at three vectors.
    """
    p = gammas.shape[0]
    size = 1 << n
    phi = qaoa_state(levels, level_index, gammas, betas, n)
    energy = expectation(phi, c)

    lam = np.empty(size, dtype=np.complex128)
    for z in range(size):
        lam[z] = c[z] * phi[z]
    d_gamma = np.empty(p)
    d_beta = np.empty(p)
    for i in range(p - 1, -1, -1):
        # generator of the mixer is H_B = -sum_q X_q
        d_beta[i] = -2.0 * unmix_with_overlap(lam, phi, betas[i], n).imag
        d_gamma[i] = 2.0 * cost_overlap(lam, phi, c).imag
        cost_phase(lam, levels, level_index, -gammas[i])
        cost_phase(phi, levels, level_index, -gammas[i])
    return energy, d_gamma, d_beta
