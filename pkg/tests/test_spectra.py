import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlgaplab.errors import GaplessWithinTolerance, ZeroState
from dlgaplab.hamiltonian import FFHamiltonian, ProjectorTerm
from dlgaplab.models import aklt_chain, commuting_chain, heisenberg_fm_chain, random_ff_chain
from dlgaplab.spectra import energy, ground_space, lowest_eigenpair, restricted_operator_norm
from dlgaplab.tensorspace import SiteLattice, random_state


def single_qubit(Q):
    return FFHamiltonian(SiteLattice(1), (ProjectorTerm((1,), Q),), "qubit")


def test_single_qubit_gap():
    sp = ground_space(single_qubit(np.diag([0.0, 1.0])))
    assert abs(sp.epsilon0) <= 1e-12
    assert abs(sp.gamma - 1.0) <= 1e-12
    assert sp.ground_dim == 1


def test_zero_terms_are_gapless():
    H = single_qubit(np.zeros((2, 2)))
    with pytest.raises(GaplessWithinTolerance):
        ground_space(H)
    sp = ground_space(H, require_gap=False)
    assert sp.ground_dim == 2 and np.isnan(sp.gamma)


@pytest.mark.parametrize("H", [heisenberg_fm_chain(6), aklt_chain(4), commuting_chain(6), random_ff_chain(6, 2, 1, 2)],
                         ids=lambda H: H.label)
def test_iterative_matches_dense(H):
    dense = ground_space(H, solver="dense")
    itv = ground_space(H, solver="iterative", seed=3)
    assert dense.ground_dim == itv.ground_dim
    assert abs(dense.epsilon0 - itv.epsilon0) <= 1e-8
    assert abs(dense.epsilon1 - itv.epsilon1) <= 1e-8
    # same ground space: projectors agree
    assert np.max(np.abs(dense.ground_projector() - itv.ground_projector())) <= 1e-8
    assert itv.iterations > 0 and itv.seed == 3


def test_ground_basis_orthonormal_and_annihilated():
    for solver in ("dense", "iterative"):
        sp = ground_space(aklt_chain(5), solver=solver)
        B = sp.ground_basis
        assert np.max(np.abs(B.conj().T @ B - np.eye(sp.ground_dim))) <= 1e-10
        assert sp.epsilon0 <= 1e-10


def test_eigenvalues_within_operator_bounds():
    H = random_ff_chain(5, 2, 2, seed=1)
    w = np.linalg.eigvalsh(H.dense())
    assert w.min() >= -1e-12 and w.max() <= H.m + 1e-12


def test_report_json_keys():
    doc = ground_space(heisenberg_fm_chain(3)).to_json_dict()
    assert set(doc) == {"epsilon0", "epsilon1", "gamma", "ground_dim", "solver", "iterations", "residual", "seed"}


def test_energy_examples():
    H = single_qubit(np.diag([0.0, 1.0]))
    assert abs(energy(H, np.array([0.0, 1.0])) - 1.0) <= 1e-12
    assert abs(energy(H, np.array([0.0, 3.0]))  - 1.0) <= 1e-12
    with pytest.raises(ZeroState):
        energy(H, np.zeros(2))
    sp = ground_space(heisenberg_fm_chain(4))
    assert abs(energy(heisenberg_fm_chain(4), sp.ground_basis[:, 0])) <= 1e-10


def test_energy_matches_dense_quadratic_form():
    H = random_ff_chain(6, 2, 1, seed=4)
    psi = random_state(0, H.lattice)
    want = np.vdot(psi, H.dense() @ psi).real
    assert abs(energy(H, psi) - want) <= 1e-10


def test_restricted_norm_trivial_cases():
    e1 = np.eye(4)[:, :1]
    assert abs(restricted_operator_norm(lambda v: v, 4, e1) - 1.0) <= 1e-12
    assert restricted_operator_norm(lambda v: 0 * v, 4) == 0.0
    assert restricted_operator_norm(lambda v: v, 2, np.eye(2)) == 0.0


@pytest.mark.parametrize("method", ["krylov", "power"])
def test_restricted_norm_second_singular_value(method):
    rng = np.random.default_rng(0)
    M = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    M /= 1.01 * np.linalg.norm(M, 2)
    _, s, Vh = np.linalg.svd(M)
    got = restricted_operator_norm(
        lambda v: M @ v, 64, Vh[:1].conj().T, adjoint=lambda v: M.conj().T @ v, method=method
    )
    assert abs(got - s[1]) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(0, 5))
def test_restricted_norm_is_max_over_complement(seed, k):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((20, 20))
    Q, _ = np.linalg.qr(rng.standard_normal((20, k))) if k else (None, None)
    got = restricted_operator_norm(lambda v: A @ v, 20, Q, adjoint=lambda v: A.T @ v, seed=seed)
    P = np.eye(20) - (Q @ Q.T if k else 0)
    assert abs(got - np.linalg.norm(A @ P, 2)) <= 1e-8 * max(1.0, got)


def test_lowest_eigenpair_with_deflation():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((30, 30))
    S = G + G.T
    w, V = np.linalg.eigh(S)
    theta, vec, _, res = lowest_eigenpair(lambda v: S @ v, 30, rng, deflate=V[:, :2].astype(complex))
    assert abs(theta - w[2]) <= 1e-9
    assert res <= 1e-10
    assert abs(abs(np.vdot(V[:, 2], vec)) - 1) <= 1e-9
