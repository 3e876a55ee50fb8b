"""Single-qubit instance showing that the g-dependence of the DL bound is needed.

``g`` rank-one projectors ``Q_i = |phi_i><phi_i|`` with
``|phi_i> = sin(i eps)|0> - cos(i eps)|1>``, applied in sequence to ``|0>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateDenominator, EpsTooLarge
from .hamiltonian import FFHamiltonian, ProjectorTerm
from .tensorspace import SiteLattice

SMALL_G = 8
RATIO_EPS_MAX = 1e-3


@dataclass(frozen=True)
class TightnessInstance:
    g: int
    eps: float

    def __post_init__(self):
        if self.g < 2:
            raise ValueError(f"g must be >= 2, got {self.g}")
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")

    def angle(self, i: int) -> float:
        return i * self.eps

    def phi(self, i: int) -> np.ndarray:
        a = self.angle(i)
        return np.array([math.sin(a), -math.cos(a)], dtype=complex)

    def phi_perp(self, i: int) -> np.ndarray:
        a = self.angle(i)
        return np.array([math.cos(a), math.sin(a)], dtype=complex)

    @cached_property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(np.outer(self.phi(i), self.phi(i).conj()) for i in range(1, self.g + 1))

    def as_hamiltonian(self) -> FFHamiltonian:
        """The instance as a one-site Hamiltonian with ``g`` terms (frustrated for g >= 2)."""
        terms = tuple(ProjectorTerm((1,), Q) for Q in self.projectors)
        return FFHamiltonian(SiteLattice(1, 2), terms, f"tightness(g={self.g},eps={self.eps:g})", frustration_free=False)


@dataclass(frozen=True)
class Residual:
    norm_sq: float
    final_state: np.ndarray


def sequential_residual(t: TightnessInstance) -> Residual:
    """``(1 - Q_g) ... (1 - Q_1)|0>`` by explicit 2x2 products."""
    psi = np.array([1.0, 0.0], dtype=complex)
    for Q in t.projectors:
        psi = psi - Q @ psi
    return Residual(float(np.vdot(psi, psi).real), psi)


@dataclass(frozen=True)
class EnergyCheck:
    energy: float
    closed_form: float
    lower_bound: float
    holds: bool


def final_energy(t: TightnessInstance) -> EnergyCheck:
    """Energy ``sum_i ||Q_i psi_g||^2`` of the normalised final state against ``(g-1)g(2g-1) eps^2 / 12``."""
    if (t.g - 1) * t.eps > 1.0:
        raise EpsTooLarge(f"(g-1)*eps = {(t.g - 1) * t.eps:g} exceeds 1")
    psi = sequential_residual(t).final_state
    psi = psi / np.linalg.norm(psi)
    e = float(sum(np.vdot(Q @ psi, Q @ psi).real for Q in t.projectors))
    closed = float(sum(math.sin((i - t.g) * t.eps) ** 2 for i in range(1, t.g + 1)))
    lower = (t.g - 1) * t.g * (2 * t.g - 1) * t.eps**2 / 12.0
    return EnergyCheck(e, closed, lower, bool(e >= lower - 1e-12))


@dataclass(frozen=True)
class RatioCheck:
    ratio: float
    paper_factor: float
    checked: bool
    holds: bool


def tightness_ratio(t: TightnessInstance) -> RatioCheck:
    """``energy / (1 - norm_sq)`` against ``(g-1)^2 / 12``; only asserted for g >= 8, eps <= 1e-3."""
    en = final_energy(t)
    denom = 1.0 - sequential_residual(t).norm_sq
    if denom <= 1e-15:
        raise DegenerateDenominator(f"1 - norm_sq = {denom:.3e} is too small")
    ratio = en.energy / denom
    factor = (t.g - 1) ** 2 / 12.0
    checked = t.g >= SMALL_G and t.eps <= RATIO_EPS_MAX
    return RatioCheck(ratio, factor, checked, bool(ratio >= factor) if checked else True)
