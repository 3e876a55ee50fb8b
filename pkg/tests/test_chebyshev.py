import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlgaplab import chebyshev
from dlgaplab.chebyshev import (
    ChebyshevFilter,
    apply_filter,
    chebyshev_t,
    eval_scalar,
    gap_substitution,
    verify_cheb_bound,
)
from dlgaplab.coarsegrain import build_coarse_hamiltonian, dense_layer_matrices, layer_projectors
from dlgaplab.models import heisenberg_fm_chain


@settings(max_examples=50, deadline=None)
@given(q=st.integers(0, 200), h=st.floats(0.01, 0.99))
def test_value_at_one(q, h):
    assert abs(eval_scalar(ChebyshevFilter(q, h), 1.0) - 1.0) <= 1e-12


def test_degree_one_closed_form():
    f = ChebyshevFilter(1, 0.5)
    assert eval_scalar(f, 0.0) == pytest.approx(-1 / 3, abs=1e-15)
    xs = np.linspace(0, 1, 7)
    np.testing.assert_allclose(eval_scalar(f, xs), (4 * xs - 1) / 3, atol=1e-15)
    chk = verify_cheb_bound(f, 1001)
    assert chk.max_abs == pytest.approx(1 / 3) and chk.holds
    assert chk.bound == pytest.approx(2 * math.exp(-math.sqrt(2)))


def test_degree_zero():
    f = ChebyshevFilter(0, 0.4)
    np.testing.assert_array_equal(eval_scalar(f, np.array([-3.0, 0.0, 0.2, 7.0])), 1.0)
    chk = verify_cheb_bound(f, 10)
    assert chk.max_abs == 1.0 and chk.bound == 2.0 and chk.holds


@pytest.mark.parametrize("q", [1, 2, 4, 8, 16, 32, 64])
@pytest.mark.parametrize("h", [0.3, 0.6, 0.9])
def test_bound_on_grid(q, h):
    assert verify_cheb_bound(ChebyshevFilter(q, h), 10_000).holds


def test_invalid_arguments():
    with pytest.raises(ValueError):
        ChebyshevFilter(-1, 0.5)
    with pytest.raises(ValueError):
        ChebyshevFilter(2, 1.0)
    with pytest.raises(ValueError):
        verify_cheb_bound(ChebyshevFilter(2, 0.5), 1)


@pytest.mark.parametrize("q", [0, 1, 5, 17, 64])
def test_recurrence_matches_cosine_form(q):
    theta = np.random.default_rng(q).uniform(0, math.pi, 1000)
    assert np.max(np.abs(chebyshev_t(q, np.cos(theta)) - np.cos(q * theta))) <= 1e-10


@pytest.mark.parametrize("q", [1, 8, 64])
def test_growth_outside_unit_interval(q):
    xs = np.linspace(1.001, 4, 200)
    lower = 0.5 * np.exp(2 * q * np.sqrt((xs - 1) / (xs + 1)))
    assert np.all(np.abs(chebyshev_t(q, xs)) >= lower * (1 - 1e-12))
    assert np.all(np.abs(chebyshev_t(q, np.linspace(-1, 1, 500))) <= 1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(q=st.integers(0, 300), h=st.floats(0.05, 0.95))
def test_normalisation_lower_bound(q, h):
    f = ChebyshevFilter(q, h)
    assert math.log(f.normalization) >= f.normalization_lower_bound() - 1e-9


def test_log_domain_path_does_not_overflow():
    f = ChebyshevFilter(2000, 0.5)
    assert f.log_domain and math.isinf(f.normalization)
    assert abs(eval_scalar(f, 1.0) - 1.0) <= 1e-12
    assert verify_cheb_bound(f, 2000).holds
    # small h: 2q sqrt(1 - h) underestimates the growth, the normalisation check catches it
    g = ChebyshevFilter(173, 0.0625)
    assert g.log_domain and abs(eval_scalar(g, 1.0) - 1.0) <= 1e-12


@pytest.mark.parametrize("q, h", [(200, 0.5), (30, 0.05), (64, 0.9)])
def test_log_domain_matches_direct(monkeypatch, q, h):
    xs = np.concatenate([np.linspace(0.0, h, 300), np.linspace(h, 1.3, 50), [-0.2]])
    direct = ChebyshevFilter(q, h)
    assert not direct.log_domain
    want = eval_scalar(direct, xs)
    monkeypatch.setattr(chebyshev, "LOG_NORMALIZATION_MAX", -1.0)
    forced = ChebyshevFilter(q, h)
    assert forced.log_domain
    got = eval_scalar(forced, xs)
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-13 * np.max(np.abs(want[:300])) + 1e-300)


def test_gap_substitution_inequality():
    for gam in np.linspace(3e-3, 3.0, 500):
        h = gap_substitution(gam)
        assert 1 - h >= gam / 8 - 1e-15
        for q in (1, 4, 16, 64):
            assert 2 * math.exp(-2 * q * math.sqrt(1 - h)) <= 2 * math.exp(-q * math.sqrt(gam / 2)) * (1 + 1e-12)


def random_contraction(seed, dim=12):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w, V = np.linalg.eigh(G + G.conj().T)
    w = (w - w.min()) / (w.max() - w.min())
    return (V * w) @ V.conj().T, w, V


def test_apply_filter_on_eigenvectors():
    A, w, V = random_contraction(0)
    f = ChebyshevFilter(9, 0.7)
    for lam, v in zip(w, V.T):
        assert np.max(np.abs(apply_filter(f, lambda x: A @ x, v) - eval_scalar(f, lam) * v)) <= 1e-9
    top = V[:, -1]
    assert np.max(np.abs(apply_filter(f, lambda x: A @ x, top) - top)) <= 1e-10


def test_apply_filter_zero_map_and_batch():
    f = ChebyshevFilter(5, 0.4)
    psi = np.random.default_rng(1).standard_normal((6, 3)) + 0j
    np.testing.assert_allclose(apply_filter(f, lambda x: 0 * x, psi), eval_scalar(f, 0.0) * psi, atol=1e-12)


def test_apply_filter_large_degree_stays_finite():
    A, w, V = random_contraction(2)
    f = ChebyshevFilter(1500, 0.6)
    out = apply_filter(f, lambda x: A @ x, V[:, 0])
    assert np.all(np.isfinite(out)) and np.linalg.norm(out) <= 1e-12


def test_apply_filter_on_chain_matches_dense_eigendecomposition():
    H = heisenberg_fm_chain(6)
    cg = build_coarse_hamiltonian(H, 2)
    lp = layer_projectors(H, cg)
    dense = dense_layer_matrices(H, cg)
    A = dense["pi_odd"] @ dense["pi_even"] @ dense["pi_odd"]
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    f = ChebyshevFilter(4, gap_substitution(cg.gamma))
    PA = (V * eval_scalar(f, w)) @ V.conj().T
    psi = np.random.default_rng(0).standard_normal(H.dim) + 0j
    assert np.max(np.abs(apply_filter(f, lp.a_action, psi) - PA @ psi)) <= 1e-9
