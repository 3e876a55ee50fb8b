"""The detectability-lemma operator and numerical checks of its bounds.

``DL(H) = Pi_L ... Pi_1`` with ``Pi_l`` the product of ``1 - Q_i`` over layer
``l``; layer 1 acts first. Every product routine here is matrix-free and
accepts a single state or a column batch of states.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrdering
from .hamiltonian import FFHamiltonian, LayerDecomposition, interaction_graph
from .spectra import SpectralData, restricted_operator_norm

SLACK = 1e-10
ANNIHILATED = 1e-14


def worker_count() -> int:
    """Thread cap for sweeps, read from ``DLGAPLAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("DLGAPLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ProjectorOrdering:
    """Order in which the factors ``1 - Q_i`` are applied (first entry acts first)."""

    sequence: tuple[int, ...]
    origin: str = "explicit"

    @classmethod
    def layered(cls, layers: LayerDecomposition) -> "ProjectorOrdering":
        return cls(layers.ordering(), "layered")

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "ProjectorOrdering":
        return cls(tuple(int(i) for i in rng.permutation(m)), "explicit")

    def validate(self, m: int) -> None:
        if sorted(self.sequence) != list(range(m)):
            raise InvalidOrdering(f"ordering {self.sequence} is not a permutation of 0..{m - 1}")


def apply_ordered_product(H: FFHamiltonian, ordering: ProjectorOrdering, psi: np.ndarray) -> np.ndarray:
    """``(1 - Q_{s[m-1]}) ... (1 - Q_{s[0]}) psi`` for ``s = ordering.sequence``."""
    ordering.validate(H.m)
    phi = np.asarray(psi, dtype=complex)
    for i in ordering.sequence:
        phi = H.apply_complement(i, phi)
    return phi


def apply_ordered_adjoint(H: FFHamiltonian, ordering: ProjectorOrdering, psi: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`apply_ordered_product`: the same factors in reverse order."""
    ordering.validate(H.m)
    phi = np.asarray(psi, dtype=complex)
    for i in reversed(ordering.sequence):
        phi = H.apply_complement(i, phi)
    return phi


def apply_dl(H: FFHamiltonian, layers: LayerDecomposition, psi: np.ndarray, power: int = 1) -> np.ndarray:
    if power < 1:
        raise ValueError(f"power must be >= 1, got {power}")
    order = ProjectorOrdering.layered(layers)
    phi = psi
    for _ in range(power):
        phi = apply_ordered_product(H, order, phi)
    return phi


def apply_dl_adjoint(H: FFHamiltonian, layers: LayerDecomposition, psi: np.ndarray, power: int = 1) -> np.ndarray:
    if power < 1:
        raise ValueError(f"power must be >= 1, got {power}")
    order = ProjectorOrdering.layered(layers)
    phi = psi
    for _ in range(power):
        phi = apply_ordered_adjoint(H, order, phi)
    return phi


def dense_ordered_product(H: FFHamiltonian, ordering: ProjectorOrdering) -> np.ndarray:
    """Dense oracle: the ordered product assembled from materialised factors."""
    from .tensorspace import LocalOperator, dense_materialize

    ordering.validate(H.m)
    M = np.eye(H.dim, dtype=complex)
    for i in ordering.sequence:
        t = H.terms[i]
        M = dense_materialize(LocalOperator(t.support, t.P), H.lattice) @ M
    return M


@dataclass(frozen=True)
class DLCheck:
    lhs: float
    rhs: float
    eps_phi: float
    holds: bool
    annihilated: bool = False


def _batch_energy(H: FFHamiltonian, phi: np.ndarray, nrm2: np.ndarray) -> np.ndarray:
    Hphi = H.apply(phi)
    quad = np.einsum("ij,ij->j", phi.conj(), Hphi).real
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(nrm2 > ANNIHILATED**2, quad / nrm2, np.nan)


def dl_inequality_batch(H: FFHamiltonian, ordering: ProjectorOrdering, states: np.ndarray, g: int) -> list[DLCheck]:
    """Check ``||prod (1 - Q_i) psi||^2 <= 1 / (eps_phi / g^2 + 1)`` for each column of ``states``."""
    phi = apply_ordered_product(H, ordering, states)
    lhs = np.einsum("ij,ij->j", phi.conj(), phi).real
    eps = _batch_energy(H, phi, lhs)
    out = []
    for l, e in zip(lhs, eps):
        if not l > ANNIHILATED**2:
            out.append(DLCheck(0.0, 1.0, float("nan"), True, annihilated=True))
            continue
        if g == 0:
            rhs = 1.0 if e <= SLACK else 0.0
        else:
            rhs = 1.0 / (e / g**2 + 1.0)
        out.append(DLCheck(float(l), float(rhs), float(e), bool(l <= rhs + SLACK)))
    return out


def verify_dl_inequality(H: FFHamiltonian, ordering: ProjectorOrdering, psi: np.ndarray, g: int) -> DLCheck:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("psi must be normalised")
    return dl_inequality_batch(H, ordering, psi[:, None], g)[0]


@dataclass(frozen=True)
class ConverseCheck:
    lhs: float
    rhs: float
    holds: bool


def converse_batch(H: FFHamiltonian, ordering: ProjectorOrdering, states: np.ndarray) -> list[ConverseCheck]:
    """Check ``||prod (1 - Q_i) psi||^2 >= 1 - 4 <psi|H|psi>`` for each unit column of ``states``."""
    phi = apply_ordered_product(H, ordering, states)
    lhs = np.einsum("ij,ij->j", phi.conj(), phi).real
    quad = np.einsum("ij,ij->j", states.conj(), H.apply(states)).real
    rhs = 1.0 - 4.0 * quad
    return [ConverseCheck(float(l), float(r), bool(l >= r - SLACK)) for l, r in zip(lhs, rhs)]


def verify_gao_converse(H: FFHamiltonian, ordering: ProjectorOrdering, psi: np.ndarray) -> ConverseCheck:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("psi must be normalised")
    return converse_batch(H, ordering, psi[:, None])[0]


def random_unit_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    return Z / np.linalg.norm(Z, axis=0)


def low_energy_states(ground_basis: np.ndarray, count: int, rng: np.random.Generator, amplitude: float = 0.1) -> np.ndarray:
    """Random ground vectors plus an ``amplitude``-sized random perturbation, renormalised."""
    dim, k = ground_basis.shape
    c = rng.standard_normal((k, count)) + 1j * rng.standard_normal((k, count))
    base = ground_basis @ (c / np.linalg.norm(c, axis=0))
    states = base + amplitude * random_unit_states(dim, count, rng)
    return states / np.linalg.norm(states, axis=0)


@dataclass(frozen=True)
class SweepRow:
    ordering_id: int
    state_id: int
    lhs: float
    rhs: float
    eps_phi: float
    holds: bool


def sweep(
    H: FFHamiltonian,
    states: np.ndarray,
    orderings: list[ProjectorOrdering],
    kind: str = "dl",
    g: int | None = None,
) -> list[SweepRow]:
    """Evaluate the DL (``kind="dl"``) or converse (``kind="converse"``) inequality
    on every (ordering, state) pair, parallel over orderings, rows in a fixed order."""
    if kind == "dl" and g is None:
        g = interaction_graph(H).g

    def one(item):
        oid, order = item
        if kind == "dl":
            checks = dl_inequality_batch(H, order, states, g)
            return [SweepRow(oid, j, c.lhs, c.rhs, c.eps_phi, c.holds) for j, c in enumerate(checks)]
        checks = converse_batch(H, order, states)
        return [SweepRow(oid, j, c.lhs, c.rhs, float("nan"), c.holds) for j, c in enumerate(checks)]

    workers = worker_count()
    items = list(enumerate(orderings))
    if workers == 1:
        chunks = [one(it) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, items))
    return [row for chunk in chunks for row in chunk]


@dataclass(frozen=True)
class DLReport:
    one_minus_delta: float
    delta: float
    gamma: float
    g: int
    g_exact: int
    lower: float
    upper: float
    corollary_bound: float
    corollary_holds: bool
    sandwich_holds: bool
    lower_applied: bool

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def compute_delta(
    H: FFHamiltonian,
    layers: LayerDecomposition,
    spec: SpectralData,
    seed: int = 0,
    g: int | None = None,
    tol: float = 1e-10,
) -> DLReport:
    """Shrinking factor ``1 - Delta = ||DL(H) restricted to the excited space||`` and the bounds
    ``gamma / 4g^2 <= Delta <= 4 gamma`` and ``1 - Delta <= 1 / sqrt(gamma / g^2 + 1)``."""
    g_exact = interaction_graph(H, "exact-commutator").g
    if g is None:
        g = interaction_graph(H).g
    omd = restricted_operator_norm(
        lambda v: apply_dl(H, layers, v),
        H.dim,
        spec.ground_basis,
        adjoint=lambda v: apply_dl_adjoint(H, layers, v),
        seed=seed,
        tol=tol,
    )
    omd = min(omd, 1.0)
    delta = 1.0 - omd
    gamma = spec.gamma
    cor = 1.0 / math.sqrt(gamma / g**2 + 1.0) if g > 0 else 0.0
    # a single term (g = 0) has DL equal to the ground projector, the lower bound is not applied
    lower_applied = g > 0 and H.m > 1
    lower = gamma / (4 * g**2) if lower_applied else float("nan")
    upper = 4.0 * gamma
    sandwich = (not lower_applied or lower - 1e-9 <= delta) and delta <= upper + 1e-9
    return DLReport(
        omd, delta, gamma, g, g_exact, lower, upper, cor, bool(omd <= cor + 1e-9), bool(sandwich), lower_applied
    )
