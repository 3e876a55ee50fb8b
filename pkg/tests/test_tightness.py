import math

import numpy as np
import pytest

from dlgaplab.errors import DegenerateDenominator, EpsTooLarge
from dlgaplab.hamiltonian import interaction_graph, verify_frustration_free
from dlgaplab.tightness import TightnessInstance, final_energy, sequential_residual, tightness_ratio


def test_projectors_are_rank_one():
    t = TightnessInstance(5, 0.2)
    for Q in t.projectors:
        assert abs(np.trace(Q) - 1) <= 1e-12
        assert np.max(np.abs(Q @ Q - Q)) <= 1e-12


def test_consecutive_perpendicular_overlap():
    t = TightnessInstance(6, 0.15)
    for i in range(1, 6):
        assert abs(np.vdot(t.phi_perp(i), t.phi_perp(i + 1)) - math.cos(0.15)) <= 1e-12


def test_zero_angle_keeps_norm():
    assert sequential_residual(TightnessInstance(2, 0.0)).norm_sq == pytest.approx(1.0, abs=1e-15)


def test_norm_closed_form_small_case():
    res = sequential_residual(TightnessInstance(3, 0.1))
    assert abs(res.norm_sq - math.cos(0.1) ** 6) <= 1e-12
    perp = TightnessInstance(3, 0.1).phi_perp(3)
    assert abs(abs(np.vdot(perp, res.final_state)) / np.linalg.norm(res.final_state) - 1) <= 1e-12


@pytest.mark.parametrize("g", [2, 5, 17, 64])
@pytest.mark.parametrize("eps", [1e-4, 1e-2, 0.1])
def test_norm_closed_form_grid(g, eps):
    assert abs(sequential_residual(TightnessInstance(g, eps)).norm_sq - math.cos(eps) ** (2 * g)) <= 1e-12


def test_norm_lower_bound():
    t = TightnessInstance(40, 1e-3)
    assert sequential_residual(t).norm_sq >= 1 - 2 * 40 * 1e-6


def test_energy_two_projectors():
    for eps in (1e-3, 0.1, 0.5, 1.0):
        en = final_energy(TightnessInstance(2, eps))
        assert en.energy == pytest.approx(math.sin(eps) ** 2, abs=1e-12)
        assert en.lower_bound == pytest.approx(eps**2 / 2)
        assert en.holds


def test_energy_closed_sum_and_ratio_window():
    en = final_energy(TightnessInstance(10, 1e-3))
    assert abs(en.energy - en.closed_form) <= 1e-15
    assert 1 <= en.energy / en.lower_bound <= 4


def test_last_term_contributes_nothing():
    t = TightnessInstance(7, 0.05)
    psi = sequential_residual(t).final_state
    assert np.linalg.norm(t.projectors[-1] @ psi) <= 1e-14


def test_energy_guard():
    with pytest.raises(EpsTooLarge):
        final_energy(TightnessInstance(11, 0.2))


@pytest.mark.parametrize("g, eps", [(40, 1e-4), (8, 1e-3), (16, 1e-4), (64, 1e-4)])
def test_ratio_holds_for_large_g(g, eps):
    ra = tightness_ratio(TightnessInstance(g, eps))
    assert ra.checked and ra.holds
    assert ra.paper_factor == (g - 1) ** 2 / 12


def test_ratio_skipped_for_small_g():
    ra = tightness_ratio(TightnessInstance(2, 1e-3))
    assert not ra.checked and ra.holds


def test_degenerate_denominator():
    with pytest.raises(DegenerateDenominator):
        tightness_ratio(TightnessInstance(8, 0.0))


def test_as_hamiltonian_is_frustrated_and_fully_connected():
    t = TightnessInstance(4, 0.1)
    H = t.as_hamiltonian()
    assert H.m == 4 and H.n == 1
    assert not verify_frustration_free(H).is_ff
    graph = interaction_graph(H, "exact-commutator")
    assert all(len(nb) == 3 for nb in graph.neighbors)


def test_invalid_instances():
    with pytest.raises(ValueError):
        TightnessInstance(1, 0.1)
    with pytest.raises(ValueError):
        TightnessInstance(3, -0.1)
