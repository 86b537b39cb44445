"""Exact statevector simulation of the QAOA ansatz for diagonal cost Hamiltonians.

A statevector is a plain contiguous ``complex128`` array of length
``2**n``. Gate functions update it in place and return it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from . import _kernels
from .exceptions import CapacityError, DimensionMismatch, InfeasibleError
from .graphs import MAX_QUBITS, CostDiagonal

if TYPE_CHECKING:
    from .protocols import SymmetryDomain


@dataclass(frozen=True, eq=False)
class AngleSchedule:
    """The ``2p`` QAOA angles; ``gamma`` multiplies H_C and ``beta`` multiplies H_B."""

    gamma: np.ndarray
    beta: np.ndarray
    domain: Optional["SymmetryDomain"] = None

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=float).reshape(-1)
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if gamma.shape != beta.shape:
            raise DimensionMismatch(f"gamma has {gamma.size} entries but beta has {beta.size}")
        if gamma.size == 0:
            raise InfeasibleError("depth p must be at least 1")
        gamma.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "beta", beta)

    @property
    def p(self) -> int:
        return self.gamma.size

    def to_vector(self) -> np.ndarray:
        """Flatten as ``(gamma_1..gamma_p, beta_1..beta_p)``."""
        return np.concatenate([self.gamma, self.beta])

    @classmethod
    def from_vector(cls, x, domain=None) -> "AngleSchedule":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise DimensionMismatch(f"expected a flat vector of 2p angles, got shape {x.shape}")
        p = x.size // 2
        return cls(x[:p], x[p:], domain)

    def __eq__(self, other):
        if not isinstance(other, AngleSchedule):
            return NotImplemented
        return np.array_equal(self.gamma, other.gamma) and np.array_equal(self.beta, other.beta)

    def __repr__(self):
        return f"AngleSchedule(gamma={self.gamma.tolist()}, beta={self.beta.tolist()})"


def _n_qubits(psi: np.ndarray) -> int:
    n = int(psi.shape[0]).bit_length() - 1
    if psi.ndim != 1 or psi.shape[0] != 1 << n:
        raise DimensionMismatch(f"statevector length {psi.shape} is not a power of two")
    return n


def _check_pair(psi: np.ndarray, d: CostDiagonal) -> None:
    if psi.shape != (1 << d.n,):
        raise DimensionMismatch(f"statevector of length {psi.shape[0]} does not match {d.n} qubits")


def plus_state(n: int, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Uniform superposition ``|+>^n``, the ground state of ``-sum X``."""
    if n < 1:
        raise InfeasibleError(f"need at least one qubit, got {n}")
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceed the budget of {max_qubits}")
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def apply_cost_phase(psi: np.ndarray, d: CostDiagonal, gamma: float) -> np.ndarray:
    """Multiply amplitude ``z`` by ``exp(-i gamma c_z)``."""
    _check_pair(psi, d)
    _kernels.cost_phase(psi, d.levels, d.level_index, float(gamma))
    return psi


def apply_mixer(psi: np.ndarray, beta: float) -> np.ndarray:
    """Apply ``exp(-i beta H_B)`` with ``H_B = -sum_i X_i``."""
    _kernels.mixer(psi, float(beta), _n_qubits(psi))
    return psi


def prepare_qaoa_state(d: CostDiagonal, angles: AngleSchedule) -> np.ndarray:
    return _kernels.qaoa_state(d.levels, d.level_index, angles.gamma, angles.beta, d.n)


def expectation(psi: np.ndarray, d: CostDiagonal) -> float:
    """``<psi|H_C|psi>``; real by construction."""
    _check_pair(psi, d)
    return float(_kernels.expectation(psi, d.values))


def approximation_ratio(energy: float, d: CostDiagonal) -> float:
    if d.c_min == 0.0:
        raise InfeasibleError("approximation ratio undefined: C_min = 0 (graph without edges)")
    return energy / d.c_min


def qaoa_energy(d: CostDiagonal, angles: AngleSchedule) -> float:
    return expectation(prepare_qaoa_state(d, angles), d)


def energy_and_gradient(d: CostDiagonal, angles: AngleSchedule):
    """Energy and its exact gradient, ordered ``(d/dgamma_1.., d/dbeta_1..)``.

    Computed with a single adjoint sweep at a small constant multiple of
    the cost of one forward simulation, independent of the depth.
    """
    energy, dg, db = _kernels.energy_and_gradient(
        d.values, d.levels, d.level_index, angles.gamma, angles.beta, d.n)
    return float(energy), np.concatenate([dg, db])


def gradient(d: CostDiagonal, angles: AngleSchedule) -> np.ndarray:
    return energy_and_gradient(d, angles)[1]


def most_likely_states(psi: np.ndarray, k: int = 1) -> np.ndarray:
    """Indices of the ``k`` largest-probability basis states, most probable first."""
    prob = np.abs(psi) ** 2
    order = np.argsort(-prob, kind="stable")
    return order[:k]
