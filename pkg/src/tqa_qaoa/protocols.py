"""Angle initializations, symmetry domains and the folded angle distance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import DimensionMismatch, InfeasibleError
from .graphs import Graph
from .simulator import AngleSchedule

BETA_PERIOD = math.pi / 2
GAMMA_PERIOD = math.pi


@dataclass(frozen=True)
class SymmetryDomain:
    """Fundamental domain of the QAOA angles for a class of cost Hamiltonians.

    ``"unweighted"``: beta has period pi/2 and gamma period pi.
    ``"weighted"``: beta has period pi/2, gamma is not periodic; random
    initialization draws gamma from ``[-k pi/2, k pi/2)``.
    """

    tag: Literal["unweighted", "weighted"] = "unweighted"
    k: int = 1

    def __post_init__(self):
        if self.tag not in ("unweighted", "weighted"):
            raise InfeasibleError(f"unknown symmetry domain {self.tag!r}")
        if int(self.k) != self.k or self.k < 1:
            raise InfeasibleError(f"interval multiplier k must be a positive integer, got {self.k}")

    @property
    def weighted(self) -> bool:
        return self.tag == "weighted"

    @classmethod
    def for_graph(cls, g: Graph, k: int = 1) -> "SymmetryDomain":
        return cls("weighted" if g.weighted else "unweighted", k)


@dataclass(frozen=True)
class TqaSchedule:
    p: int
    dt: float

    def __post_init__(self):
        if self.p < 1:
            raise InfeasibleError(f"depth must be >= 1, got p={self.p}")
        if not self.dt > 0:
            raise InfeasibleError(f"time step must be positive, got dt={self.dt}")

    @property
    def total_time(self) -> float:
        return self.p * self.dt

    def angles(self, domain=None) -> AngleSchedule:
        return tqa_angles(self.p, self.dt, domain)


def tqa_angles(p: int, dt: float, domain=None) -> AngleSchedule:
    """First-order Trotterization of a linear annealing ramp of total time ``p * dt``.

    ``gamma_i = (i/p) dt`` and ``beta_i = (1 - i/p) dt`` for ``i = 1..p``.
    """
    if p < 1:
        raise InfeasibleError(f"depth must be >= 1, got p={p}")
    if not dt > 0:
        raise InfeasibleError(f"time step must be positive, got dt={dt}")
    frac = np.arange(1, p + 1) / p
    return AngleSchedule(frac * dt, (1.0 - frac) * dt, domain)


def random_angles(p: int, domain: SymmetryDomain, rng) -> AngleSchedule:
    rng = np.random.default_rng(rng)
    half_gamma = (domain.k if domain.weighted else 1) * math.pi / 2
    gamma = rng.uniform(-half_gamma, half_gamma, size=p)
    beta = rng.uniform(-math.pi / 4, math.pi / 4, size=p)
    return AngleSchedule(gamma, beta, domain)


def folded_abs(x, alpha: float):
    """Distance of ``x`` from the nearest multiple of ``alpha``; lies in ``[0, alpha/2]``."""
    r = np.mod(x, alpha)
    out = np.minimum(r, alpha - r)
    return float(out) if np.ndim(out) == 0 else out


def angle_distance(a: AngleSchedule, b: AngleSchedule, domain: SymmetryDomain) -> float:
    if a.p != b.p:
        raise DimensionMismatch(f"cannot compare schedules of depth {a.p} and {b.p}")
    d_beta = folded_abs(a.beta - b.beta, BETA_PERIOD)
    if domain.weighted:
        d_gamma = np.abs(a.gamma - b.gamma)
    else:
        d_gamma = folded_abs(a.gamma - b.gamma, GAMMA_PERIOD)
    return float(np.sum(d_beta) + np.sum(d_gamma))


def _wrap(x: np.ndarray, period: float) -> np.ndarray:
    # into [-period/2, period/2)
    half = period / 2
    inside = (x >= -half) & (x < half)
    out = np.where(inside, x, np.mod(x + half, period) - half)
    # rounding in mod can land exactly on the open end
    out = np.where(out >= half, out - period, out)
    return np.where(out < -half, out + period, out)


def canonicalize(a: AngleSchedule, domain: SymmetryDomain) -> AngleSchedule:
    """Map every angle into the fundamental domain by whole symmetry periods."""
    beta = _wrap(a.beta, BETA_PERIOD)
    gamma = a.gamma if domain.weighted else _wrap(a.gamma, GAMMA_PERIOD)
    return AngleSchedule(gamma, beta, domain)
