import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlgaplab.dlcore import (
    ProjectorOrdering,
    apply_dl,
    apply_dl_adjoint,
    apply_ordered_product,
    compute_delta,
    dense_ordered_product,
    low_energy_states,
    random_unit_states,
    sweep,
    verify_dl_inequality,
    verify_gao_converse,
)
from dlgaplab.errors import InvalidOrdering
from dlgaplab.hamiltonian import FFHamiltonian, ProjectorTerm, decompose_layers, interaction_graph
from dlgaplab.models import aklt_chain, commuting_chain, heisenberg_fm_chain, random_ff_chain
from dlgaplab.spectra import ground_space
from dlgaplab.tensorspace import LocalOperator, SiteLattice, dense_materialize, random_state
from dlgaplab.tightness import TightnessInstance


@pytest.fixture(scope="module")
def heis6():
    H = heisenberg_fm_chain(6)
    return H, ground_space(H, solver="dense"), decompose_layers(H)


def test_invalid_ordering():
    H = heisenberg_fm_chain(4)
    with pytest.raises(InvalidOrdering):
        apply_ordered_product(H, ProjectorOrdering((0, 0, 1)), random_state(0, H.lattice))
    with pytest.raises(InvalidOrdering):
        apply_ordered_product(H, ProjectorOrdering((0, 1)), random_state(0, H.lattice))


def test_ground_vector_unchanged(heis6):
    H, sp, layers = heis6
    rng = np.random.default_rng(0)
    omega = sp.ground_basis[:, 3]
    for _ in range(5):
        out = apply_ordered_product(H, ProjectorOrdering.random(H.m, rng), omega)
        assert np.max(np.abs(out - omega)) <= 1e-12
    assert np.max(np.abs(apply_dl(H, layers, omega, power=5) - omega)) <= 1e-12


def test_commuting_chain_gives_ground_projector():
    H = commuting_chain(6)
    P = ground_space(H).ground_projector()
    rng = np.random.default_rng(1)
    psi = random_state(2, H.lattice)
    for _ in range(4):
        out = apply_ordered_product(H, ProjectorOrdering.random(H.m, rng), psi)
        assert np.max(np.abs(out - P @ psi)) <= 1e-10


def test_matches_dense_product():
    H = random_ff_chain(6, 2, 2, seed=0)
    order = ProjectorOrdering.random(H.m, np.random.default_rng(3))
    psi = random_state(4, H.lattice)
    D = dense_ordered_product(H, order)
    assert np.max(np.abs(apply_ordered_product(H, order, psi) - D @ psi)) <= 1e-10


def test_dense_product_order_convention():
    # first entry applied first: D = (1 - Q_b)(1 - Q_a) for sequence (a, b)
    H = heisenberg_fm_chain(3)
    P = [dense_materialize(LocalOperator(t.support, t.P), H.lattice) for t in H.terms]
    assert np.allclose(dense_ordered_product(H, ProjectorOrdering((0, 1))), P[1] @ P[0])


def test_power_is_repeated_application(heis6):
    H, _, layers = heis6
    psi = random_state(5, H.lattice)
    twice = apply_dl(H, layers, apply_dl(H, layers, psi))
    assert np.max(np.abs(apply_dl(H, layers, psi, power=2) - twice)) <= 1e-12
    with pytest.raises(ValueError):
        apply_dl(H, layers, psi, power=0)


def test_adjoint_is_adjoint(heis6):
    H, _, layers = heis6
    a, b = random_state(1, H.lattice), random_state(2, H.lattice)
    lhs = np.vdot(b, apply_dl(H, layers, a))
    rhs = np.vdot(apply_dl_adjoint(H, layers, b), a)
    assert abs(lhs - rhs) <= 1e-12


@pytest.mark.parametrize("q", [1, 2, 4])
def test_power_decay_per_state(heis6, q):
    H, sp, layers = heis6
    omd = compute_delta(H, layers, sp).one_minus_delta
    P = sp.ground_projector()
    for seed in range(5):
        psi = random_state(seed, H.lattice)
        left = np.linalg.norm(P @ psi - apply_dl(H, layers, psi, power=q))
        assert left <= omd**q * np.linalg.norm(psi - P @ psi) + 1e-10


def test_dl_keeps_excited_space(heis6):
    H, sp, layers = heis6
    P = sp.ground_projector()
    for seed in range(5):
        psi = random_state(seed, H.lattice)
        perp = psi - P @ psi
        out = apply_dl(H, layers, perp)
        assert np.max(np.abs(sp.ground_basis.conj().T @ out)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_product_is_contraction_and_dl_bound_any_order(seed):
    H = random_ff_chain(6, 2, 1, seed=seed % 7)
    rng = np.random.default_rng(seed)
    psi = random_unit_states(H.dim, 1, rng)[:, 0]
    order = ProjectorOrdering.random(H.m, rng)
    assert np.linalg.norm(apply_ordered_product(H, order, psi)) <= 1 + 1e-12
    assert verify_dl_inequality(H, order, psi, interaction_graph(H).g).holds
    assert verify_gao_converse(H, order, psi).holds


def test_ground_state_equality_cases(heis6):
    H, sp, layers = heis6
    omega = sp.ground_basis[:, 0]
    order = ProjectorOrdering.layered(layers)
    chk = verify_dl_inequality(H, order, omega, 2)
    assert abs(chk.lhs - 1) <= 1e-12 and abs(chk.rhs - 1) <= 1e-10 and chk.eps_phi <= 1e-10 and chk.holds
    conv = verify_gao_converse(H, order, omega)
    assert abs(conv.lhs - 1) <= 1e-12 and abs(conv.rhs - 1) <= 1e-10 and conv.holds


def test_converse_vacuous_at_high_energy():
    H = commuting_chain(4)
    psi = np.zeros(H.dim, dtype=complex)
    psi[0b0101] = 1.0  # every bond is a domain wall
    chk = verify_gao_converse(H, ProjectorOrdering((0, 1, 2)), psi)
    assert chk.rhs <= 0 and chk.holds


def test_annihilated_state_is_flagged():
    H = commuting_chain(2)
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0
    chk = verify_dl_inequality(H, ProjectorOrdering((0,)), psi, 2)
    assert chk.annihilated and chk.lhs == 0.0 and chk.holds and np.isnan(chk.eps_phi)


def test_unnormalised_state_rejected():
    H = heisenberg_fm_chain(3)
    with pytest.raises(ValueError):
        verify_gao_converse(H, ProjectorOrdering((0, 1)), 2 * random_state(0, H.lattice))


def test_heisenberg_sweeps():
    H = heisenberg_fm_chain(8)
    rng = np.random.default_rng(7)
    states = random_unit_states(H.dim, 100, rng)
    orders = [ProjectorOrdering.random(H.m, rng) for _ in range(10)]
    rows = sweep(H, states, orders, "dl")
    assert len(rows) == 1000 and all(r.holds for r in rows)
    low = low_energy_states(ground_space(H).ground_basis, 100, rng)
    assert all(r.holds for r in sweep(H, low, orders, "converse"))


def test_sweep_rows_independent_of_thread_count(monkeypatch):
    H = random_ff_chain(5, 2, 1, seed=1)
    rng = np.random.default_rng(0)
    states = random_unit_states(H.dim, 10, rng)
    orders = [ProjectorOrdering.random(H.m, rng) for _ in range(6)]
    monkeypatch.setenv("DLGAPLAB_THREADS", "1")
    serial = sweep(H, states, orders)
    monkeypatch.setenv("DLGAPLAB_THREADS", "3")
    assert sweep(H, states, orders) == serial


def test_tightness_instance_dl_inequality():
    t = TightnessInstance(3, 0.1)
    H = t.as_hamiltonian()
    g = interaction_graph(H, "exact-commutator").g
    assert g == 2
    chk = verify_dl_inequality(H, ProjectorOrdering((0, 1, 2)), np.array([1.0, 0.0]), g)
    assert chk.holds
    assert 1 / 48 <= chk.lhs / chk.rhs <= 1.0


def test_delta_commuting_and_single_term():
    H = commuting_chain(6)
    rep = compute_delta(H, decompose_layers(H), ground_space(H))
    assert abs(rep.delta - 1) <= 1e-10
    single = FFHamiltonian(SiteLattice(2), (heisenberg_fm_chain(2).terms[0],))
    rep = compute_delta(single, decompose_layers(single), ground_space(single))
    assert abs(rep.delta - 1) <= 1e-10 and not rep.lower_applied and rep.sandwich_holds


@pytest.mark.parametrize("n", [4, 6, 8])
def test_delta_sandwich_heisenberg(n):
    H = heisenberg_fm_chain(n)
    sp = ground_space(H, solver="dense")
    layers = decompose_layers(H)
    rep = compute_delta(H, layers, sp)
    assert rep.g == 2 and rep.lower == pytest.approx(sp.gamma / 16)
    assert rep.sandwich_holds and rep.corollary_holds
    assert 0 <= rep.one_minus_delta <= 1 and rep.delta == 1 - rep.one_minus_delta
    D = dense_ordered_product(H, ProjectorOrdering.layered(layers))
    sigma = np.linalg.norm(D @ (np.eye(H.dim) - sp.ground_projector()), 2)
    assert abs(sigma - rep.one_minus_delta) <= 1e-8


def test_delta_records_exact_degree():
    H = aklt_chain(4)
    rep = compute_delta(H, decompose_layers(H), ground_space(H))
    assert rep.g_exact <= rep.g
    assert set(rep.to_json_dict()) >= {"one_minus_delta", "delta", "gamma", "g", "lower", "upper"}
