"""Independent reference implementations used only by the tests.

Everything here is written from the definitions, with explicit Pauli
matrices and Kronecker products, so it shares no code with the package.
"""
import itertools

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def on_qubit(op, q, n):
    """``op`` acting on qubit ``q``; qubit q is bit q of the basis index."""
    factors = [I2] * n
    # the leftmost Kronecker factor is the most significant bit
    factors[n - 1 - q] = op
    out = np.array([[1.0]])
    for f in factors:
        out = np.kron(out, f)
    return out


def dense_cost(edges, n):
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for u, v, w in edges:
        h += w * on_qubit(Z, u, n) @ on_qubit(Z, v, n)
    return h


def dense_mixer(n):
    return -sum(on_qubit(X, q, n) for q in range(n))


def dense_qaoa_state(edges, n, gammas, betas):
    hc, hb = dense_cost(edges, n), dense_mixer(n)
    psi = np.full(2 ** n, 2 ** (-n / 2), dtype=complex)
    for g, b in zip(gammas, betas):
        psi = expm(-1j * b * hb) @ (expm(-1j * g * hc) @ psi)
    return psi


def dense_energy(edges, n, gammas, betas):
    psi = dense_qaoa_state(edges, n, gammas, betas)
    return float(np.real(np.conj(psi) @ dense_cost(edges, n) @ psi))


def brute_force_cut_energy(edges, n):
    """Minimum of sum w z_u z_v over all spin assignments, and the minimizers."""
    best, arg = np.inf, []
    for bits in itertools.product([0, 1], repeat=n):
        spins = [1 - 2 * b for b in bits]
        c = sum(w * spins[u] * spins[v] for u, v, w in edges)
        index = sum(b << q for q, b in enumerate(bits))
        if c < best - 1e-12:
            best, arg = c, [index]
        elif abs(c - best) <= 1e-12:
            arg.append(index)
    return best, sorted(arg)


def central_difference(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g
