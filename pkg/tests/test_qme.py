import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import jv

from latticebec.constants import HBAR
from latticebec.dephasing import dephasing_exponents, gamma_pair
from latticebec.errors import InvalidParameterError
from latticebec.qme import (
    coherent_kernel, default_steps, dephasing_exponent_table, dissipative_kernel,
    evolve, hopping_hamiltonian, mean_position, transport_stats,
)


def test_kernel_trivial_limits(p_transport):
    assert dissipative_kernel(p_transport, 0.0, 0.0) == 0.0
    assert dissipative_kernel(p_transport.with_kappa(0.0), 0.0, 1e-3) == 0.0
    assert dissipative_kernel(p_transport, 0.0, 1e-3) > 0.0
    with pytest.raises(InvalidParameterError):
        dissipative_kernel(p_transport, 0.0, -1e-3)


def test_kernel_decays_with_separation(p_transport):
    t = 5e-4
    k0 = dissipative_kernel(p_transport, 0.0, t)
    k5 = dissipative_kernel(p_transport, 5.0, t)
    assert abs(k5) < k0


def test_coherent_kernel_finite(p_transport):
    assert np.isfinite(coherent_kernel(p_transport, 0.0, 5e-4))


def test_exponent_table_matches_pair_exponent(p_transport):
    """Phi(d, t) in the cache is the subdecoherent exponent at separation d*a."""
    times = np.linspace(0.0, 2e-3, 41)
    cache = dephasing_exponent_table(p_transport, 8, times)
    assert cache.phi.shape == (41, 8)
    assert np.all(cache.phi[:, 0] == 0.0)
    a = p_transport.derived.site_spacing
    for d in (1, 4, 7):
        _, am, _ = dephasing_exponents(p_transport, d * a, times[-1])
        assert cache.phi[-1, d] == pytest.approx(am, rel=1e-6)
    # exponents grow with time at every separation
    assert np.all(np.diff(cache.phi[:, 1:], axis=0) >= -1e-12)


def test_hopping_hamiltonian_structure(p_transport):
    h = hopping_hamiltonian(p_transport, 7)
    assert np.allclose(h, h.T)
    j = p_transport.lattice.hopping
    assert np.all(np.diag(h, 1) == -j)
    assert h[0, 6] == 0.0  # hard wall, no periodic hop


def test_free_evolution_matches_bessel(p_transport):
    """kappa = 0: p_j(t) = J_{j-j0}(2 J t / hbar)^2 on an open chain wide
    enough that the wavefront never reaches the edges."""
    p = replace(p_transport.with_kappa(0.0),
                lattice=replace(p_transport.lattice, sites=41))
    t_end = 2e-3
    traj = evolve(p, t_end)
    z = 2.0 * p.lattice.hopping * t_end / HBAR
    ref = jv(np.arange(41) - 20, z) ** 2
    assert np.max(np.abs(traj.populations[-1] - ref)) < 1e-8
    assert traj.min_eigenvalue > -1e-12


def test_evolution_conserves_trace_and_hermiticity(p_transport):
    p = replace(p_transport, lattice=replace(p_transport.lattice, sites=21))
    traj = evolve(p, 1e-3)
    rho = traj.rho_final
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.all(traj.populations[-1] > -1e-8)
    assert traj.times[-1] == pytest.approx(1e-3)


def test_pure_dephasing_matches_exact_pair_factor(p_transport):
    """J = 0: the two-site coherence decays exactly by gamma_pair."""
    p = replace(p_transport,
                lattice=replace(p_transport.lattice, hopping=0.0, sites=2))
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    traj = evolve(p, 1.5e-3, rho0=rho0, n_steps=10, store_states=True)
    for k in range(1, 11):
        expect = gamma_pair(p, 0, 1, traj.times[k])
        assert abs(traj.states[k][0, 1]) / 0.5 == pytest.approx(expect, abs=1e-6)
    # populations of the dephasing-only problem never move
    assert np.allclose(traj.populations, 0.5)


def test_initial_state_options(p_transport):
    p = replace(p_transport.with_kappa(0.0),
                lattice=replace(p_transport.lattice, sites=9))
    traj = evolve(p, 1e-4, j0=2)
    assert traj.populations[0][2] == 1.0
    with pytest.raises(InvalidParameterError):
        evolve(p, 1e-4, rho0=np.eye(9))  # trace 9, not a state
    bad = np.zeros((9, 9), dtype=complex)
    bad[0, 0] = 1.0
    bad[0, 5] = 0.3
    with pytest.raises(InvalidParameterError):
        evolve(p, 1e-4, rho0=bad)  # not Hermitian


def test_kernel_cache_reuse_and_mismatch(p_transport):
    p = replace(p_transport, lattice=replace(p_transport.lattice, sites=11))
    n = default_steps(p, 5e-4)
    times = np.linspace(0.0, 5e-4, n + 1)
    cache = dephasing_exponent_table(p, 11, times)
    a = evolve(p, 5e-4, kernel=cache)
    b = evolve(p, 5e-4)
    assert np.allclose(a.populations[-1], b.populations[-1], atol=1e-14)
    with pytest.raises(InvalidParameterError):
        evolve(p, 5e-4, n_steps=n + 3, kernel=cache)


def test_transport_stats_on_known_profiles():
    # symmetric three-point profile: sigma = sqrt(0.5), interval = {j0}
    p = np.array([0.25, 0.5, 0.25])
    st = transport_stats(p, 1.0)
    assert st.sigma_d == pytest.approx(math.sqrt(0.5))
    assert st.valid
    assert st.p_bar == pytest.approx(0.5 / (2 * st.sigma_d))
    assert st.p_d == pytest.approx((0.5 - st.p_bar) ** 2 / (2 * st.sigma_d))
    # point distribution is flagged
    st0 = transport_stats(np.array([0.0, 1.0, 0.0]), 1.0)
    assert not st0.valid and st0.sigma_d == 0.0
    # accepts a density matrix too
    rho = np.diag([0.25, 0.5, 0.25]).astype(complex)
    assert transport_stats(rho, 1.0).sigma_d == pytest.approx(math.sqrt(0.5))


def test_mean_position():
    assert mean_position(np.array([0.0, 0.0, 1.0])) == pytest.approx(2.0)
    assert mean_position(np.diag([0.5, 0.5, 0.0])) == pytest.approx(0.5)


def test_width_tracks_ballistic_cone(p_transport):
    """kappa = 0 width grows as sqrt(2) J t a / hbar (ballistic spreading)."""
    p = replace(p_transport.with_kappa(0.0),
                lattice=replace(p_transport.lattice, sites=61))
    t_end = 3e-3
    traj = evolve(p, t_end)
    expected = math.sqrt(2.0) * p.lattice.hopping * t_end / HBAR
    assert traj.widths[-1] == pytest.approx(expected, rel=1e-3)
    assert np.all(np.diff(traj.widths) >= -1e-9)
