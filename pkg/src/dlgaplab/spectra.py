"""Ground spaces, spectral gaps and restricted operator norms.

Two routes are provided for the low-lying spectrum: dense diagonalisation of
the materialised Hamiltonian (dimension up to ``DENSE_MAX_DIM``) and a
matrix-free, deflated, thick-restart Krylov solver driven only by ``H psi``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GaplessWithinTolerance, NoConvergence, ZeroState
from .hamiltonian import FFHamiltonian
from .tensorspace import DENSE_MAX_DIM

log = logging.getLogger(__name__)

CLUSTER_TOL = 1e-9
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Lowest two energy levels and an orthonormal basis (columns) of the ground space.

    ``epsilon1`` and ``gamma`` are NaN when no level lies above the ground level.
    """

    epsilon0: float
    epsilon1: float
    gamma: float
    ground_basis: np.ndarray
    solver: str
    iterations: int = 0
    residual: float = 0.0
    seed: int | None = None

    @property
    def ground_dim(self) -> int:
        return self.ground_basis.shape[1]

    def ground_projector(self) -> np.ndarray:
        V = self.ground_basis
        return V @ V.conj().T

    def to_json_dict(self) -> dict:
        return {
            "epsilon0": self.epsilon0,
            "epsilon1": self.epsilon1,
            "gamma": self.gamma,
            "ground_dim": self.ground_dim,
            "solver": self.solver,
            "iterations": self.iterations,
            "residual": self.residual,
            "seed": self.seed,
        }


def _orthogonalize(v: np.ndarray, basis: np.ndarray | None) -> np.ndarray:
    # classical Gram-Schmidt applied twice
    if basis is None or basis.shape[1] == 0:
        return v
    for _ in range(2):
        # conjugating the (small) right-hand side avoids copying the basis
        v = v - basis @ (basis.T @ v.conj()).conj()
    return v


def lowest_eigenpair(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    rng: np.random.Generator,
    deflate: np.ndarray | None = None,
    tol: float = RESIDUAL_TOL,
    max_basis: int = 80,
    keep: int = 10,
    max_matvec: int = 20000,
) -> tuple[float, np.ndarray, int, float]:
    """Lowest eigenpair of a Hermitian map restricted to the complement of ``deflate``.

    Krylov expansion by residual vectors with full reorthogonalisation and
    thick restarts that keep the ``keep`` lowest Ritz vectors. Returns
    ``(theta, vector, matvecs, residual_norm)``.
    """
    theta, u, its, res, _ = _krylov_lowest(matvec, dim, rng, deflate, tol, max_basis, keep, max_matvec)
    return theta, u, its, res


def _krylov_lowest(matvec, dim, rng, deflate, tol, max_basis, keep, max_matvec, start=None):
    """Worker behind :func:`lowest_eigenpair`; also returns the next ``keep`` Ritz vectors.

    ``start`` (columns) seeds the search space, which lets consecutive deflated
    searches reuse the Ritz vectors the previous one already converged towards.
    """
    remaining = dim - (0 if deflate is None else deflate.shape[1])
    if remaining < 1:
        raise ValueError("deflation space already fills the whole space")
    max_basis = min(max_basis, remaining)
    keep = min(keep, max_basis - 1)
    V = np.zeros((dim, max_basis), dtype=complex)
    W = np.zeros((dim, max_basis), dtype=complex)
    Hs = np.zeros((max_basis, max_basis), dtype=complex)
    queue = [] if start is None else [start[:, j] for j in range(min(start.shape[1], keep))]
    k = 0
    t = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    res = np.inf
    for it in range(1, max_matvec + 1):
        if queue:
            t = queue.pop(0)
        t = _orthogonalize(_orthogonalize(t, deflate), V[:, :k])
        nt = np.linalg.norm(t)
        if nt < 1e-13:
            # invariant subspace reached: continue from a fresh random direction
            t = _orthogonalize(_orthogonalize(rng.standard_normal(dim) + 0j, deflate), V[:, :k])
            nt = np.linalg.norm(t)
            if nt < 1e-13:
                break
        V[:, k] = t / nt
        W[:, k] = _orthogonalize(matvec(V[:, k]), deflate)
        # only the new row and column of the projected matrix change
        col = (V[:, : k + 1].T @ W[:, k].conj()).conj()
        Hs[: k + 1, k] = col
        Hs[k, : k + 1] = col.conj()
        Hs[k, k] = col[k].real
        k += 1
        theta, s = np.linalg.eigh(Hs[:k, :k])
        u = V[:, :k] @ s[:, 0]
        r = W[:, :k] @ s[:, 0] - theta[0] * u
        res = np.linalg.norm(r)
        if (res <= tol and not queue) or k == remaining:
            rest = V[:, :k] @ s[:, 1 : keep + 1]
            return float(theta[0]), u / np.linalg.norm(u), it, float(res), rest
        if k == max_basis:
            V[:, :keep] = V[:, :k] @ s[:, :keep]
            W[:, :keep] = W[:, :k] @ s[:, :keep]
            Hs[:, :] = 0.0
            Hs[np.arange(keep), np.arange(keep)] = theta[:keep]
            k = keep
        if not queue:
            t = r
    raise NoConvergence(f"Krylov solver stalled at residual {res:.3e} after {max_matvec} products")


def _dense_ground_space(H: FFHamiltonian, tol: float, require_gap: bool) -> SpectralData:
    Hd = H.dense()
    if H.is_real:
        w, v = np.linalg.eigh(Hd.real)
        v = v.astype(complex)
    else:
        w, v = np.linalg.eigh(Hd)
    eps0 = float(w[0])
    ground = w <= eps0 + tol
    above = w[~ground]
    if above.size == 0:
        if require_gap:
            raise GaplessWithinTolerance("no eigenvalue above the ground level")
        eps1 = gamma = float("nan")
    else:
        eps1 = float(above[0])
        gamma = eps1 - eps0
    basis = v[:, ground]
    residual = float(np.max(np.linalg.norm(Hd @ basis - basis * w[ground], axis=0)))
    return SpectralData(eps0, eps1, gamma, basis, "dense", 0, residual)


def _iterative_ground_space(
    H: FFHamiltonian, tol: float, require_gap: bool, seed: int, residual_tol: float, max_matvec: int
) -> SpectralData:
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    eps0 = None
    eps1 = float("nan")
    total = 0
    worst = 0.0
    while len(found) < H.dim:
        deflate = np.stack(found, axis=1) if found else None
        # a fresh random start per search: single-vector Krylov spaces see only one
        # direction of a degenerate eigenspace, so seeding with old Ritz vectors is unsafe
        theta, u, its, res = lowest_eigenpair(
            H.apply, H.dim, rng, deflate=deflate, tol=residual_tol, max_matvec=max_matvec
        )
        total += its
        worst = max(worst, res)
        if eps0 is None:
            eps0 = theta
        elif theta > eps0 + tol:
            eps1 = theta
            break
        found.append(_orthogonalize(u, deflate) / np.linalg.norm(_orthogonalize(u, deflate)))
        log.debug("ground vector %d at %.3e (%d products)", len(found), theta, its)
    if np.isnan(eps1) and require_gap:
        raise GaplessWithinTolerance("no eigenvalue above the ground level")
    gamma = eps1 - eps0
    return SpectralData(
        float(eps0), eps1, gamma, np.stack(found, axis=1), "iterative", total, worst, seed
    )


def ground_space(
    H: FFHamiltonian,
    tol: float = CLUSTER_TOL,
    solver: str = "auto",
    seed: int = 0,
    require_gap: bool = True,
    residual_tol: float = RESIDUAL_TOL,
    max_matvec: int = 20000,
) -> SpectralData:
    """Ground level, ground basis and gap of ``H``.

    Levels within ``tol`` of the lowest eigenvalue are grouped into the ground
    space. ``solver`` is ``"dense"``, ``"iterative"`` or ``"auto"`` (dense up to
    ``DENSE_MAX_DIM``).
    """
    if solver == "auto":
        solver = "dense" if H.dim <= DENSE_MAX_DIM else "iterative"
    if H.m == 0 and require_gap:
        raise GaplessWithinTolerance("Hamiltonian has no terms")
    if solver == "dense":
        return _dense_ground_space(H, tol, require_gap)
    if solver == "iterative":
        return _iterative_ground_space(H, tol, require_gap, seed, residual_tol, max_matvec)
    raise ValueError(f"unknown solver {solver!r}")


def energy(H: FFHamiltonian, psi: np.ndarray) -> float:
    """Rayleigh quotient ``<psi|H|psi> / <psi|psi>``."""
    psi = np.asarray(psi, dtype=complex)
    nrm2 = np.vdot(psi, psi).real
    if nrm2 <= 1e-28:
        raise ZeroState("energy of a (numerically) zero state")
    return float(np.vdot(psi, H.apply(psi)).real / nrm2)


def restricted_operator_norm(
    action: Callable[[np.ndarray], np.ndarray],
    dim: int,
    deflate: np.ndarray | None = None,
    *,
    adjoint: Callable[[np.ndarray], np.ndarray] | None = None,
    seed: int = 0,
    tol: float = 1e-10,
    max_iter: int = 200000,
    method: str = "krylov",
) -> float:
    """Largest value of ``||action(psi)||`` over unit ``psi`` orthogonal to ``deflate``.

    Both methods work on the Hermitian Gram map ``P actionᴴ action P``, with ``P``
    the projector onto the complement of ``span(deflate)`` re-applied at every step;
    ``adjoint`` defaults to ``action`` (Hermitian case).

    ``method="krylov"`` finds its top eigenvalue with the thick-restart solver used
    for ground spaces, to residual ``tol``. ``method="power"`` runs plain power
    iteration and stops once the latest increment, extrapolated as a geometric
    tail, is below ``tol`` relatively; it is slow when the top of the spectrum
    is clustered.
    """
    adjoint = action if adjoint is None else adjoint
    rng = np.random.default_rng(seed)
    remaining = dim - (0 if deflate is None else deflate.shape[1])
    if remaining < 1:
        return 0.0

    def gram(v):
        return _orthogonalize(adjoint(action(_orthogonalize(v, deflate))), deflate)

    if method == "power":
        return _power_top(gram, dim, rng, deflate, tol, max_iter)
    if method != "krylov":
        raise ValueError(f"unknown method {method!r}")
    theta, _, _, _ = lowest_eigenpair(lambda v: -gram(v), dim, rng, deflate, tol=tol, max_matvec=max_iter)
    return float(np.sqrt(max(-theta, 0.0))) + 0.0  # no negative zero


def _power_top(gram, dim, rng, deflate, tol, max_iter) -> float:
    x = _orthogonalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim), deflate)
    x /= np.linalg.norm(x)
    prev = step = None
    for _ in range(max_iter):
        y = gram(x)
        lam = float(np.vdot(x, y).real)
        ny = np.linalg.norm(y)
        if ny <= 1e-300 or lam <= 1e-24:
            # the restricted map vanishes up to rounding
            return float(np.sqrt(max(lam, 0.0))) + 0.0
        if prev is not None:
            diff = lam - prev
            rate = min(diff / step, 1.0 - 1e-6) if step else 0.0
            # a decrease can only come from rounding: the iteration has settled
            if diff <= max(tol * (1.0 - rate), 1e-13) * lam:
                return float(np.sqrt(lam))
            step = diff
        prev = lam
        x = y / ny
    raise NoConvergence(f"power iteration did not settle within {max_iter} steps")
