"""Frustration-free Hamiltonians built as sums of local projectors.

Term indices are 0-based positions in ``FFHamiltonian.terms``; site indices are
1-based as in :mod:`dlgaplab.tensorspace`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import NotHermitian, NotProjector, NotPSD
from .tensorspace import (
    LocalOperator,
    SiteLattice,
    apply_matrix,
    dense_materialize,
)

NULL_TOL = 1e-10
COMMUTATOR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectorTerm:
    """A Hermitian projector ``Q`` on the sites in ``support``."""

    support: tuple[int, ...]
    Q: np.ndarray

    def __post_init__(self):
        op = LocalOperator(self.support, self.Q)
        Q = op.matrix
        if np.max(np.abs(Q - Q.conj().T), initial=0.0) > 1e-12:
            raise NotHermitian(f"term on {op.support} is not Hermitian")
        if np.max(np.abs(Q @ Q - Q), initial=0.0) > 1e-10:
            raise NotProjector(f"term on {op.support} is not idempotent")
        object.__setattr__(self, "support", op.support)
        object.__setattr__(self, "Q", Q)

    @property
    def d(self) -> int:
        return self.operator.d

    @cached_property
    def operator(self) -> LocalOperator:
        return LocalOperator(self.support, self.Q)

    @cached_property
    def P(self) -> np.ndarray:
        """The local ground-space projector ``1 - Q``."""
        return np.eye(self.Q.shape[0]) - self.Q

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.Q).real))


@dataclass(frozen=True, eq=False)
class FFHamiltonian:
    """``H = sum_i Q_i`` on a chain.

    ``frustration_free`` records the claim made by the constructor; it is
    checked by :func:`verify_frustration_free`, never assumed silently.
    """

    lattice: SiteLattice
    terms: tuple[ProjectorTerm, ...]
    label: str = "custom"
    frustration_free: bool = True

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            t.operator.check_fits(self.lattice)
        object.__setattr__(self, "terms", terms)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def is_real(self) -> bool:
        return all(not np.any(t.Q.imag) for t in self.terms)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """``H psi`` without forming ``H``."""
        psi = np.asarray(psi, dtype=complex)
        out = np.zeros_like(psi)
        for t in self.terms:
            out += apply_matrix(t.Q, t.support, psi, self.n, self.d)
        return out

    def apply_term(self, i: int, psi: np.ndarray) -> np.ndarray:
        t = self.terms[i]
        return apply_matrix(t.Q, t.support, psi, self.n, self.d)

    def apply_complement(self, i: int, psi: np.ndarray) -> np.ndarray:
        """``(1 - Q_i) psi``."""
        t = self.terms[i]
        return apply_matrix(t.P, t.support, psi, self.n, self.d)

    def dense(self) -> np.ndarray:
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for t in self.terms:
            H += dense_materialize(t.operator, self.lattice)
        return H

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "label": self.label,
            "terms": [
                {
                    "support": list(t.support),
                    "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in t.Q],
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict, projectorize_terms: bool = True) -> "FFHamiltonian":
        """Build from a model-spec document; matrices are projectorized unless told otherwise."""
        lat = SiteLattice(int(doc["n"]), int(doc["d"]))
        terms = []
        for t in doc["terms"]:
            arr = np.asarray(t["matrix"], dtype=float)
            mat = arr[..., 0] + 1j * arr[..., 1]
            op = LocalOperator(tuple(t["support"]), mat)
            terms.append(projectorize(op) if projectorize_terms else ProjectorTerm(op.support, op.matrix))
        return cls(lat, tuple(terms), doc.get("label", "custom"))


def save_model(H: FFHamiltonian, path) -> None:
    Path(path).write_text(json.dumps(H.to_json_dict()), encoding="utf-8")


def load_model(path) -> FFHamiltonian:
    return FFHamiltonian.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def projectorize(h: LocalOperator, tol: float = NULL_TOL) -> ProjectorTerm:
    """Projector onto the orthogonal complement of the null space of a PSD local term."""
    M = h.matrix
    if np.max(np.abs(M - M.conj().T), initial=0.0) > max(tol, 1e-12):
        raise NotHermitian(f"term on {h.support} is not Hermitian")
    w, v = np.linalg.eigh((M + M.conj().T) / 2)
    if w[0] < -tol:
        raise NotPSD(f"term on {h.support} has eigenvalue {w[0]:.3e} < -{tol:g}")
    vs = v[:, w > tol]
    Q = vs @ vs.conj().T
    return ProjectorTerm(h.support, (Q + Q.conj().T) / 2)


@dataclass(frozen=True)
class InteractionGraph:
    """``neighbors[i]`` is the set of term indices that may fail to commute with term ``i``."""

    neighbors: tuple[frozenset, ...]
    mode: str

    @property
    def g(self) -> int:
        return max((len(s) for s in self.neighbors), default=0)


def _commute_on_joint_support(a: ProjectorTerm, b: ProjectorTerm) -> bool:
    joint = sorted(set(a.support) | set(b.support))
    pos = {s: j + 1 for j, s in enumerate(joint)}
    sub = SiteLattice(len(joint), a.d)
    A = dense_materialize(LocalOperator(tuple(pos[s] for s in a.support), a.Q), sub)
    B = dense_materialize(LocalOperator(tuple(pos[s] for s in b.support), b.Q), sub)
    return np.max(np.abs(A @ B - B @ A)) <= COMMUTATOR_TOL


def interaction_graph(H: FFHamiltonian, mode: str = "support-overlap") -> InteractionGraph:
    """Non-commutation graph of the terms.

    ``support-overlap`` links every pair of terms with intersecting supports, an
    upper bound on non-commutation. ``exact-commutator`` keeps only the pairs whose
    commutator has a max-abs entry above 1e-12.
    """
    if mode not in ("support-overlap", "exact-commutator"):
        raise ValueError(f"unknown interaction-graph mode {mode!r}")
    nbrs = [set() for _ in range(H.m)]
    supports = [set(t.support) for t in H.terms]
    for i in range(H.m):
        for j in range(i + 1, H.m):
            if not supports[i] & supports[j]:
                continue
            if mode == "exact-commutator" and _commute_on_joint_support(H.terms[i], H.terms[j]):
                continue
            nbrs[i].add(j)
            nbrs[j].add(i)
    return InteractionGraph(tuple(frozenset(s) for s in nbrs), mode)


@dataclass(frozen=True)
class LayerDecomposition:
    """Partition of term indices into layers of pairwise support-disjoint terms."""

    layers: tuple[tuple[int, ...], ...]

    @property
    def L(self) -> int:
        return len(self.layers)

    def ordering(self) -> tuple[int, ...]:
        """Term indices in application order: layer 1 first."""
        return tuple(i for layer in self.layers for i in layer)


def decompose_layers(H: FFHamiltonian) -> LayerDecomposition:
    """Greedy colouring in ascending term order: each term joins the first layer it fits in."""
    layers: list[list[int]] = []
    occupied: list[set] = []
    for i, t in enumerate(H.terms):
        sup = set(t.support)
        for layer, used in zip(layers, occupied):
            if not used & sup:
                layer.append(i)
                used |= sup
                break
        else:
            layers.append([i])
            occupied.append(set(sup))
    return LayerDecomposition(tuple(tuple(layer) for layer in layers))


@dataclass(frozen=True)
class FFCheck:
    epsilon0: float
    is_ff: bool
    max_violation: float


def verify_frustration_free(H: FFHamiltonian, tol: float = NULL_TOL, **solver_kw) -> FFCheck:
    """Check that the ground energy vanishes and every term annihilates the ground space."""
    from .spectra import ground_space

    spec = ground_space(H, require_gap=False, **solver_kw)
    worst = 0.0
    for i in range(H.m):
        worst = max(worst, float(np.max(np.linalg.norm(H.apply_term(i, spec.ground_basis), axis=0))))
    is_ff = spec.epsilon0 <= tol and worst <= np.sqrt(tol)
    return FFCheck(spec.epsilon0, bool(is_ff), worst)
