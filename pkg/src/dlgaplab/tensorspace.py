"""Tensor-product Hilbert spaces of spin chains and matrix-free local operators.

Basis convention: the amplitude of the product state ``|s_1 s_2 ... s_n>`` sits at
the mixed-radix index ``sum_i s_i * d**(n - i)``, i.e. site 1 is the most
significant digit. Sites are 1-based throughout.

All operator kernels accept either a single state of shape ``(d**n,)`` or a
batch of states stored as columns, shape ``(d**n, b)``.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DenseTooLarge, DimensionMismatch, SupportOutOfRange

MAX_DIM = 2**26
DENSE_MAX_DIM = 2**12

_STATE_MAGIC = b"DLGS"


@dataclass(frozen=True)
class SiteLattice:
    """An open chain of ``n`` sites with local dimension ``d``.

    ``k`` (term locality) and ``D`` (lattice dimension) are metadata only.
    """

    n: int
    d: int = 2
    k: int = 2
    D: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"site count must be positive, got {self.n}")
        if self.d < 2:
            raise ValueError(f"local dimension must be >= 2, got {self.d}")
        if self.D != 1:
            raise ValueError("only chains (D=1) are supported")
        if self.d**self.n > MAX_DIM:
            raise DimensionMismatch(f"d**n = {self.d}**{self.n} exceeds the cap 2**26")

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def sites(self) -> range:
        return range(1, self.n + 1)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A dense matrix acting on the sites in ``support`` (strictly increasing, 1-based)."""

    support: tuple[int, ...]
    matrix: np.ndarray
    d: int = field(init=False)

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if not support:
            raise ValueError("support must be non-empty")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError(f"support must be strictly increasing, got {support}")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"operator matrix must be square, got shape {mat.shape}")
        d = round(mat.shape[0] ** (1.0 / len(support)))
        if d < 2 or d ** len(support) != mat.shape[0]:
            raise DimensionMismatch(
                f"matrix dimension {mat.shape[0]} is not d**{len(support)} for an integer d >= 2"
            )
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "d", d)

    @property
    def contiguous(self) -> bool:
        return self.support[-1] - self.support[0] == len(self.support) - 1

    def check_fits(self, lat: SiteLattice) -> None:
        if self.d != lat.d:
            raise DimensionMismatch(f"operator local dimension {self.d} != lattice d={lat.d}")
        if self.support[0] < 1 or self.support[-1] > lat.n:
            raise SupportOutOfRange(f"support {self.support} outside sites 1..{lat.n}")

    def shifted(self, offset: int) -> "LocalOperator":
        """Same matrix with every site index moved by ``offset``."""
        return LocalOperator(tuple(s + offset for s in self.support), self.matrix)


def _check_state(psi: np.ndarray, lat: SiteLattice) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim not in (1, 2) or psi.shape[0] != lat.dim:
        raise DimensionMismatch(f"state has shape {psi.shape}, expected leading dimension {lat.dim}")
    return psi


def apply_matrix(matrix: np.ndarray, support, psi: np.ndarray, n: int, d: int) -> np.ndarray:
    """Kernel behind :func:`embed_apply`; no validation, returns a new array."""
    k = len(support)
    batch = psi.shape[1:]
    first, last = support[0], support[-1]
    if last - first == k - 1:
        # contiguous support: one batched matmul on a (left, d**k, right) view
        left = d ** (first - 1)
        right = d ** (n - last) * (int(np.prod(batch)) if batch else 1)
        out = np.matmul(matrix, psi.reshape(left, d**k, right))
        return out.reshape(psi.shape)
    t = psi.reshape((d,) * n + batch)
    axes = [s - 1 for s in support]
    out = np.tensordot(matrix.reshape((d,) * (2 * k)), t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(psi.shape)


def embed_apply(op: LocalOperator, psi: np.ndarray, lat: SiteLattice) -> np.ndarray:
    """Apply ``op`` tensored with the identity on the remaining sites to ``psi``."""
    op.check_fits(lat)
    psi = _check_state(psi, lat)
    return apply_matrix(op.matrix, op.support, psi.astype(complex, copy=False), lat.n, lat.d)


def random_state(seed: int, lat: SiteLattice) -> np.ndarray:
    """Unit vector with i.i.d. complex Gaussian amplitudes."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(lat.dim) + 1j * rng.standard_normal(lat.dim)
    return z / np.linalg.norm(z)


def basis_state(index: int, lat: SiteLattice) -> np.ndarray:
    e = np.zeros(lat.dim, dtype=complex)
    e[index] = 1.0
    return e


def product_state(digits, lat: SiteLattice) -> np.ndarray:
    """Computational basis state ``|s_1 ... s_n>``."""
    if len(digits) != lat.n:
        raise DimensionMismatch(f"need {lat.n} digits, got {len(digits)}")
    index = 0
    for s in digits:
        index = index * lat.d + int(s)
    return basis_state(index, lat)


def dense_materialize(op: LocalOperator, lat: SiteLattice) -> np.ndarray:
    """Full ``d**n x d**n`` matrix of ``op`` tensored with the identity (Kronecker construction)."""
    op.check_fits(lat)
    if lat.dim > DENSE_MAX_DIM:
        raise DenseTooLarge(f"dimension {lat.dim} exceeds the dense threshold {DENSE_MAX_DIM}")
    n, d, k = lat.n, lat.d, len(op.support)
    full = np.kron(op.matrix, np.eye(d ** (n - k)))
    # rows/cols of `full` are ordered (support sites, other sites); permute to natural order
    rest = [s for s in lat.sites if s not in op.support]
    order = [s - 1 for s in op.support] + [s - 1 for s in rest]
    inverse = np.argsort(order)
    t = full.reshape((d,) * (2 * n))
    t = t.transpose(list(inverse) + [n + i for i in inverse])
    return t.reshape(lat.dim, lat.dim)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes plus the lattice header used for import/export."""

    amplitudes: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.d**self.n:
            raise DimensionMismatch(f"{amps.shape[0]} amplitudes for d**n = {self.d**self.n}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "_norm", float(np.linalg.norm(amps)))

    @property
    def norm(self) -> float:
        return self._norm

    @property
    def lattice(self) -> SiteLattice:
        return SiteLattice(self.n, self.d)


def save_state(state: StateVector, path) -> None:
    """Write a state as JSON (``.json``) or flat binary (anything else).

    Binary layout: ``b"DLGS"``, little-endian uint32 ``n`` and ``d``, then
    ``d**n`` complex128 little-endian amplitudes in the documented basis order.
    """
    path = Path(path)
    if path.suffix == ".json":
        doc = {
            "n": state.n,
            "d": state.d,
            "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
        }
        path.write_text(json.dumps(doc), encoding="utf-8")
    else:
        header = _STATE_MAGIC + struct.pack("<II", state.n, state.d)
        path.write_bytes(header + state.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        pairs = np.asarray(doc["amplitudes"], dtype=float).reshape(-1, 2)
        return StateVector(pairs[:, 0] + 1j * pairs[:, 1], int(doc["n"]), int(doc["d"]))
    raw = path.read_bytes()
    if raw[:4] != _STATE_MAGIC:
        raise ValueError(f"{path} is not a dlgaplab binary state file")
    n, d = struct.unpack("<II", raw[4:12])
    return StateVector(np.frombuffer(raw[12:], dtype="<c16").astype(complex), n, d)
