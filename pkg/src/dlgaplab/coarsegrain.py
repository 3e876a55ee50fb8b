"""Coarse-graining of nearest-neighbour chains into overlapping blocks of ``r`` sites.

Block ``alpha`` (1-based) covers sites ``(alpha-1) r/2 + 1 .. (alpha-1) r/2 + r``.
Its coarse term is ``1 - Pbar_alpha`` where ``Pbar_alpha`` projects onto the
common ground space of all fine terms supported inside the block.

Layer conventions: the fine odd layer holds the bonds ``{1,2}, {3,4}, ...`` and
is the first layer applied by ``DL(H)``; so ``DL(H)ᴴ DL(H) = Pi_odd Pi_even Pi_odd``.
The coarse odd layer holds the odd-numbered blocks and ``DL(Hbar) = Pibar_even Pibar_odd``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import spectra
from .errors import DenseTooLarge, GroundSpaceMismatch, Misaligned, NotNearestNeighbor, OddScale, QTooLarge
from .hamiltonian import FFHamiltonian, ProjectorTerm
from .tensorspace import DENSE_MAX_DIM, LocalOperator, SiteLattice, apply_matrix, dense_materialize

NULL_TOL = 1e-10
Map = Callable[[np.ndarray], np.ndarray]


def build_groups(n: int, r: int) -> list[tuple[int, ...]]:
    if r < 2 or r % 2:
        raise OddScale(f"scale r must be an even integer >= 2, got {r}")
    half = r // 2
    if n < r or n % half:
        raise Misaligned(f"n={n} must be >= r={r} and a multiple of r/2={half}")
    count = 2 * (n - r) // r + 1
    return [tuple(range(a * half + 1, a * half + r + 1)) for a in range(count)]


def _require_nearest_neighbor(H: FFHamiltonian) -> None:
    for t in H.terms:
        if len(t.support) != 2 or t.support[1] != t.support[0] + 1:
            raise NotNearestNeighbor(f"term on {t.support} is not a nearest-neighbour bond")


def coarse_projector(H: FFHamiltonian, group) -> ProjectorTerm:
    """``Qbar = 1 - Pbar`` on ``group``, from one dense diagonalisation of the inner terms."""
    group = tuple(group)
    dim = H.d ** len(group)
    if dim > DENSE_MAX_DIM:
        raise DenseTooLarge(f"group space dimension {dim} exceeds {DENSE_MAX_DIM}")
    offset = group[0] - 1
    sub = SiteLattice(len(group), H.d)
    Hg = np.zeros((dim, dim), dtype=complex)
    lo, hi = group[0], group[-1]
    for t in H.terms:
        if t.support[0] >= lo and t.support[-1] <= hi:
            Hg += dense_materialize(t.operator.shifted(-offset), sub)
    w, v = np.linalg.eigh((Hg + Hg.conj().T) / 2)
    null = v[:, w <= NULL_TOL]
    Qbar = np.eye(dim) - null @ null.conj().T
    return ProjectorTerm(group, (Qbar + Qbar.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class CoarseGraining:
    r: int
    groups: tuple[tuple[int, ...], ...]
    coarse_terms: tuple[ProjectorTerm, ...]
    coarse_H: FFHamiltonian
    spectrum: spectra.SpectralData
    coarse_spectrum: spectra.SpectralData
    gamma: float
    gamma_bar: float
    theorem_bound: float


def theorem_bound(r: int, gamma: float) -> float:
    return 0.25 - math.exp(-0.5 * (r - 4) * math.sqrt(gamma / 2.0))


def build_coarse_hamiltonian(
    H: FFHamiltonian,
    r: int,
    spectrum: spectra.SpectralData | None = None,
    solver: str = "auto",
    seed: int = 0,
    tol: float = 1e-9,
) -> CoarseGraining:
    """``Hbar = sum_alpha Qbar_alpha`` with the shared-ground-space check and both gaps."""
    _require_nearest_neighbor(H)
    groups = build_groups(H.n, r)
    for t in H.terms:
        if not any(t.support[0] >= g[0] and t.support[-1] <= g[-1] for g in groups):
            raise GroundSpaceMismatch(f"term on {t.support} lies in no group")
    terms = tuple(coarse_projector(H, g) for g in groups)
    Hbar = FFHamiltonian(H.lattice, terms, f"{H.label}|coarse(r={r})")
    if spectrum is None:
        spectrum = spectra.ground_space(H, solver=solver, seed=seed)
    coarse_spec = spectra.ground_space(Hbar, solver=solver, seed=seed + 1)
    if spectrum.ground_dim != coarse_spec.ground_dim:
        raise GroundSpaceMismatch(
            f"ground dimensions differ: H has {spectrum.ground_dim}, Hbar has {coarse_spec.ground_dim}"
        )
    cross = max(
        _max_annihilation(Hbar, spectrum.ground_basis),
        _max_annihilation(H, coarse_spec.ground_basis),
    )
    # a ground vector with residual rho carries an excited component of at most rho/gamma
    slack = tol + _solver_error(spectrum) + _solver_error(coarse_spec)
    if cross > slack:
        raise GroundSpaceMismatch(f"cross-annihilation residual {cross:.3e} exceeds {slack:.3e}")
    return CoarseGraining(
        r,
        tuple(groups),
        terms,
        Hbar,
        spectrum,
        coarse_spec,
        spectrum.gamma,
        coarse_spec.gamma,
        theorem_bound(r, spectrum.gamma),
    )


def _solver_error(sp: spectra.SpectralData) -> float:
    if not sp.gamma > 0.0:
        return 0.0
    return 2.0 * sp.residual / sp.gamma


def _max_annihilation(H: FFHamiltonian, basis: np.ndarray) -> float:
    return max(float(np.max(np.linalg.norm(H.apply_term(i, basis), axis=0))) for i in range(H.m))


def _layer_map(H: FFHamiltonian, idx) -> Map:
    idx = tuple(idx)

    def apply(psi):
        psi = np.asarray(psi, dtype=complex)
        for i in idx:
            t = H.terms[i]
            psi = apply_matrix(t.P, t.support, psi, H.n, H.d)
        return psi

    return apply


@dataclass(frozen=True)
class LayerProjectors:
    pi_odd: Map
    pi_even: Map
    pibar_odd: Map
    pibar_even: Map

    def a_action(self, psi):
        """``A = DL(H)ᴴ DL(H) = Pi_odd Pi_even Pi_odd``."""
        return self.pi_odd(self.pi_even(self.pi_odd(psi)))

    def dl_coarse(self, psi):
        return self.pibar_even(self.pibar_odd(psi))

    def dl_coarse_adjoint(self, psi):
        return self.pibar_odd(self.pibar_even(psi))


def layer_projectors(H: FFHamiltonian, cg: CoarseGraining) -> LayerProjectors:
    odd = [i for i, t in enumerate(H.terms) if t.support[0] % 2 == 1]
    even = [i for i, t in enumerate(H.terms) if t.support[0] % 2 == 0]
    Hbar = cg.coarse_H
    return LayerProjectors(
        _layer_map(H, odd),
        _layer_map(H, even),
        _layer_map(Hbar, range(0, Hbar.m, 2)),
        _layer_map(Hbar, range(1, Hbar.m, 2)),
    )


def _dense_of(f: Map, dim: int) -> np.ndarray:
    return f(np.eye(dim, dtype=complex))


@dataclass(frozen=True)
class LightconeCheck:
    q: int
    residual: float
    holds: bool
    method: str


def lightcone_residual(H: FFHamiltonian, cg: CoarseGraining, q: int, seed: int = 0, samples: int = 200) -> LightconeCheck:
    """Norm of ``Pibar_even Pibar_odd - Pibar_even A^q Pibar_odd`` for any ``q >= 0`` (not asserted)."""
    lp = layer_projectors(H, cg)

    def rhs(psi):
        v = lp.pibar_odd(psi)
        for _ in range(q):
            v = lp.a_action(v)
        return lp.pibar_even(v)

    if H.dim <= DENSE_MAX_DIM:
        D = _dense_of(lp.dl_coarse, H.dim) - _dense_of(rhs, H.dim)
        res = float(np.linalg.norm(D, 2))
        method = "dense"
    else:
        rng = np.random.default_rng(seed)
        res = 0.0
        for _ in range(samples):
            psi = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
            psi /= np.linalg.norm(psi)
            res = max(res, float(np.linalg.norm(lp.dl_coarse(psi) - rhs(psi))))
        method = "sampled"
    return LightconeCheck(q, res, bool(res <= 1e-10), method)


def verify_lightcone_identity(H: FFHamiltonian, r: int, q: int, cg: CoarseGraining | None = None, seed: int = 0) -> LightconeCheck:
    if q < 0 or q > r // 4:
        raise QTooLarge(f"q={q} outside [0, floor(r/4)={r // 4}]")
    if cg is None:
        cg = build_coarse_hamiltonian(H, r, seed=seed)
    return lightcone_residual(H, cg, q, seed)


@dataclass(frozen=True)
class AmplificationReport:
    model: str
    n: int
    d: int
    r: int
    q: int
    gamma: float
    gamma_bar: float
    theorem_bound: float
    dl_norm_sq: float
    filter_norm: float
    cheb_bound: float
    spbound: float
    spbound_holds: bool
    chain_holds: bool
    vacuous: bool
    holds: bool

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def verify_gap_amplification(
    H: FFHamiltonian,
    r: int,
    q: int | None = None,
    cg: CoarseGraining | None = None,
    solver: str = "auto",
    seed: int = 0,
) -> AmplificationReport:
    """Measured coarse gap against ``1/4 - ||DL(Hbar)|excited||^2 / 4`` and the closed-form bound.

    Also reports ``max ||P_q(A) psi_perp||`` and ``2 exp(-q sqrt(gamma/2))`` so the
    chain ``||DL(Hbar) psi_perp|| <= ||P_q(A) psi_perp|| <= 2 exp(-q sqrt(gamma/2))`` is checked.
    """
    from .chebyshev import ChebyshevFilter, apply_filter, gap_substitution

    q = r // 4 if q is None else q
    if q < 0 or q > r // 4:
        raise QTooLarge(f"q={q} outside [0, floor(r/4)={r // 4}]")
    if cg is None:
        cg = build_coarse_hamiltonian(H, r, solver=solver, seed=seed)
    lp = layer_projectors(H, cg)
    ground = cg.spectrum.ground_basis
    dl_norm = spectra.restricted_operator_norm(
        lp.dl_coarse, H.dim, ground, adjoint=lp.dl_coarse_adjoint, seed=seed
    )
    gamma = cg.gamma
    cheb_bound = 2.0 * math.exp(-q * math.sqrt(gamma / 2.0))
    if q > 0:
        filt = ChebyshevFilter(q, gap_substitution(gamma))
        filter_norm = spectra.restricted_operator_norm(
            lambda v: apply_filter(filt, lp.a_action, v), H.dim, ground, seed=seed
        )
    else:
        filter_norm = 1.0
    spbound = 0.25 - 0.25 * dl_norm**2
    spbound_holds = cg.gamma_bar >= spbound - 1e-9
    chain_holds = dl_norm <= filter_norm + 1e-9 and filter_norm <= cheb_bound + 1e-9
    vacuous = cg.theorem_bound < 0
    theorem_holds = cg.gamma_bar >= cg.theorem_bound - 1e-9
    return AmplificationReport(
        H.label,
        H.n,
        H.d,
        r,
        q,
        gamma,
        cg.gamma_bar,
        cg.theorem_bound,
        float(dl_norm**2),
        float(filter_norm),
        cheb_bound,
        spbound,
        bool(spbound_holds),
        bool(chain_holds),
        bool(vacuous),
        bool(theorem_holds and spbound_holds),
    )


def dense_layer_matrices(H: FFHamiltonian, cg: CoarseGraining) -> dict[str, np.ndarray]:
    """Dense oracle matrices of the four layer projectors (built from Kronecker embeddings)."""
    def prod(terms, lat):
        M = np.eye(lat.dim, dtype=complex)
        for t in terms:
            M = dense_materialize(LocalOperator(t.support, t.P), lat) @ M
        return M

    odd = [t for t in H.terms if t.support[0] % 2 == 1]
    even = [t for t in H.terms if t.support[0] % 2 == 0]
    ct = cg.coarse_terms
    return {
        "pi_odd": prod(odd, H.lattice),
        "pi_even": prod(even, H.lattice),
        "pibar_odd": prod(ct[0::2], H.lattice),
        "pibar_even": prod(ct[1::2], H.lattice),
    }

