import math
from dataclasses import replace

import numpy as np
import pytest

from latticebec.bogoliubov import coupling_density, dispersion, make_grid
from latticebec.constants import HBAR
from latticebec.errors import ConfigurationError, InvalidParameterError
from latticebec.interaction import (
    build_potential_table, gate_interaction_3d, mediated_potential,
    mediated_potential_3d_closed, polaron_energy, potential_scale,
    transient_phase,
)


def test_potential_symmetric_positive_decaying(p_cluster):
    v0 = mediated_potential(p_cluster, 0.0)
    assert v0 > 0
    assert mediated_potential(p_cluster, -3.0) == pytest.approx(
        mediated_potential(p_cluster, 3.0), rel=1e-12)
    vals = [mediated_potential(p_cluster, d) for d in range(6)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))


def test_zero_coupling_gives_zero_potential(p_cluster):
    assert mediated_potential(p_cluster.with_kappa(0.0), 1.0) == 0.0
    assert transient_phase(p_cluster.with_kappa(0.0), 1.0, 1e-3) == 0.0


def test_potential_against_explicit_ring_sum(p_cluster):
    """Independent mode-by-mode sum on a finite ring reproduces assemble()."""
    length = 6000 * p_cluster.derived.site_spacing
    grid = make_grid(p_cluster, "finite", length=length, n_max=80000)
    sep = 2 * p_cluster.derived.site_spacing
    _, hw = dispersion(p_cluster, grid.q)
    manual = float(np.sum((2.0 / length) * coupling_density(p_cluster, grid.q)
                          / hw * np.cos(grid.q * sep)))
    via_grid = mediated_potential(p_cluster, 2.0, grid=grid)
    assert via_grid == pytest.approx(manual, rel=1e-13)
    # and the long-ring sum agrees with the thermodynamic quadrature
    assert via_grid == pytest.approx(mediated_potential(p_cluster, 2.0), rel=1e-3)


def test_polaron_energy_equals_onsite_potential(p_cluster):
    assert polaron_energy(p_cluster) == pytest.approx(
        mediated_potential(p_cluster, 0.0), rel=1e-12)
    assert polaron_energy(p_cluster) > 0


def test_kappa_squared_scaling(p_cluster):
    v1 = mediated_potential(p_cluster, 1.0)
    v2 = mediated_potential(p_cluster.with_kappa(2.0 * p_cluster.coupling.kappa), 1.0)
    assert v2 == pytest.approx(4.0 * v1, rel=1e-9)


def _narrow_wannier(p_gate, ratio):
    """Copy of the 3D gate parameters with x0 = ratio * xi."""
    xi = p_gate.derived.healing_length
    m_b = p_gate.bec.mass
    omega = HBAR / (m_b * (ratio * xi) ** 2)
    return replace(p_gate, lattice=replace(p_gate.lattice, trap_frequency=omega))


def test_3d_closed_form_matches_quadrature_for_narrow_wannier(p_gate):
    p = _narrow_wannier(p_gate, 0.08)
    r = p.derived.site_spacing
    closed = mediated_potential_3d_closed(p, r)
    quadr = mediated_potential(p, 1.0)
    assert quadr == pytest.approx(closed, rel=5e-3)


def test_3d_closed_form_guards(p_gate, p_cluster):
    with pytest.raises(ConfigurationError):
        mediated_potential_3d_closed(p_cluster, 1e-7)
    with pytest.raises(InvalidParameterError):
        mediated_potential_3d_closed(p_gate, 0.0)


def test_gate_interaction_is_four_times_yukawa(p_gate):
    r = p_gate.derived.site_spacing
    assert gate_interaction_3d(p_gate, r) == pytest.approx(
        4.0 * mediated_potential_3d_closed(p_gate, r), rel=1e-14)


def test_transient_phase_short_time_cubic(p_cluster):
    """phi ~ t^3 for t much shorter than the phonon periods."""
    t = 1e-9
    p1 = transient_phase(p_cluster, 0.0, t)
    p2 = transient_phase(p_cluster, 0.0, 2 * t)
    assert p1 > 0
    assert p2 / p1 == pytest.approx(8.0, rel=1e-2)


def test_transient_phase_long_time_linear_with_potential_slope(p_cluster):
    """d phi/dt -> V(delta)/hbar after the transient settles."""
    t0 = 5e-3
    dt = 2e-3
    slope = (transient_phase(p_cluster, 1.0, t0 + dt)
             - transient_phase(p_cluster, 1.0, t0)) / dt
    assert slope == pytest.approx(mediated_potential(p_cluster, 1.0) / HBAR, rel=1e-4)


def test_transient_phase_input_validation(p_cluster):
    with pytest.raises(InvalidParameterError):
        transient_phase(p_cluster, 0.0, -1e-3)
    assert transient_phase(p_cluster, 0.0, 0.0) == 0.0


def test_potential_table_matches_pointwise_and_extrapolates(p_cluster):
    table = build_potential_table(p_cluster, delta_max=8)
    for d in (0, 1, 5, 8):
        assert table.value(d) == pytest.approx(mediated_potential(p_cluster, d),
                                               rel=1e-9)
    assert table.value(-3) == table.value(3)
    # tail extrapolation: positive, decaying, continuous at the boundary
    v8, v9, v10 = table.value(8), table.value(9), table.value(10)
    assert v8 > v9 > v10 > 0
    assert v9 / v8 == pytest.approx(v10 / v9, rel=1e-12)


def test_potential_scale_bounds_the_onsite_value(p_cluster, p_cluster2d, p_gate):
    for p in (p_cluster, p_cluster2d):
        v0 = mediated_potential(p, 0.0)
        scale = potential_scale(p)
        assert 1e-3 * scale < v0 < 1e3 * scale
