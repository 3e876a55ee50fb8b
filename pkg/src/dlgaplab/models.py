"""Zoo of frustration-free open chains with nearest-neighbour projector terms."""
from __future__ import annotations

import numpy as np

from .hamiltonian import FFHamiltonian, ProjectorTerm
from .tensorspace import SiteLattice

FAMILIES = ("heisenberg", "aklt", "commuting", "random")


def _bond_chain(n: int, d: int, Q: np.ndarray, label: str) -> FFHamiltonian:
    if n < 2:
        raise ValueError(f"a chain needs at least 2 sites, got n={n}")
    terms = tuple(ProjectorTerm((i, i + 1), Q) for i in range(1, n))
    return FFHamiltonian(SiteLattice(n, d), terms, label)


def singlet_projector() -> np.ndarray:
    s = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    return np.outer(s, s).astype(complex)


def heisenberg_fm_chain(n: int) -> FFHamiltonian:
    """Spin-1/2 ferromagnetic Heisenberg chain; each bond projects onto the singlet."""
    return _bond_chain(n, 2, singlet_projector(), "heisenberg")


def spin2_projector() -> np.ndarray:
    """Projector onto total spin 2 in the product of two spin-1 sites (basis m = +1, 0, -1)."""
    sz = np.diag([1.0, 0.0, -1.0])
    sp = np.sqrt(2.0) * np.diag([1.0, 1.0], k=1)
    sx = (sp + sp.T) / 2
    sy = (sp - sp.T) / 2j
    SS = sum(np.kron(a, a) for a in (sx, sy, sz))
    P = SS / 2 + SS @ SS / 6 + np.eye(9) / 3
    return (P + P.conj().T) / 2


def aklt_chain(n: int) -> FFHamiltonian:
    return _bond_chain(n, 3, spin2_projector(), "aklt")


def commuting_chain(n: int) -> FFHamiltonian:
    """Diagonal domain-wall projectors ``(1 - Z_i Z_{i+1}) / 2``."""
    return _bond_chain(n, 2, np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex), "commuting")


def random_ff_chain(n: int, d: int = 2, rank: int = 1, seed: int = 0) -> FFHamiltonian:
    """Bond projectors of the given rank onto random subspaces orthogonal to ``|00>``.

    ``|0...0>`` is therefore a common ground state and the chain is frustration free.
    """
    if not 1 <= rank <= d * d - 1:
        raise ValueError(f"rank must lie in [1, {d * d - 1}], got {rank}")
    if n < 2:
        raise ValueError(f"a chain needs at least 2 sites, got n={n}")
    rng = np.random.default_rng(seed)
    terms = []
    for i in range(1, n):
        G = rng.standard_normal((d * d, rank)) + 1j * rng.standard_normal((d * d, rank))
        G[0, :] = 0.0
        V, _ = np.linalg.qr(G)
        Q = V @ V.conj().T
        terms.append(ProjectorTerm((i, i + 1), (Q + Q.conj().T) / 2))
    return FFHamiltonian(SiteLattice(n, d), tuple(terms), f"random(d={d},rank={rank},seed={seed})")


def build_model(family: str, n: int, d: int | None = None, rank: int = 1, seed: int = 0) -> FFHamiltonian:
    """Dispatch by family name, as used by the command line."""
    if family == "heisenberg":
        return heisenberg_fm_chain(n)
    if family == "aklt":
        return aklt_chain(n)
    if family == "commuting":
        return commuting_chain(n)
    if family == "random":
        return random_ff_chain(n, 2 if d is None else d, rank, seed)
    raise ValueError(f"unknown model family {family!r}; choose from {FAMILIES}")
