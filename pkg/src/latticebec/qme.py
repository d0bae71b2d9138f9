"""Single-impurity quantum master equation on a 1D lattice.

The reduced dynamics is

    drho/dt = -(i/hbar)[H, rho] + dissipator,   H = -J sum (hop) + K sum j n_j

with a site-diagonal dephasing dissipator acting element-wise on coherences:

    d rho_mm' / dt  (+)=  -(2/hbar^2) [G(0, t) - G(m - m', t)] rho_mm'

where G(D, t) = sum'_q d_q sin(w_q t)/w_q (2N_q + 1) cos(q D a).  The time
integral of the rate has the closed form

    Phi(D, t) = sum'_q d_q (2 - 2cos(q D a)) (1 - cos w_q t)(2N_q+1)/(hbar w_q)^2

identical to the exponent of the exact static-impurity dephasing factor, so
the integrator alternates the exact unitary half step expm(-i H dt / 2 hbar)
with the exact element-wise decay exp(-[Phi(t+dt) - Phi(t)]) (Strang
splitting).  This preserves trace and Hermiticity identically, is exact at
kappa = 0, and reduces to the exact dephasing solution at J = 0.

The uniform on-site shift from the coherent kernel is a global phase in the
single-particle sector and is dropped; multi-particle extensions must restore
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .bogoliubov import (_MAX_PANELS, MomentumGrid, assemble_converged,
                         coupling_density, dispersion, initial_panels,
                         make_grid, oscillation_phase)
from .constants import HBAR
from .errors import AccuracyError, IntegrationError, InvalidParameterError
from .params import SystemParams, thermal_occupation

TRACE_TOL = 1e-6
# The time-local generator is not CP-divisible: its incremental dephasing
# profile oscillates with separation once the sound cone spans several sites,
# so the density matrix transiently picks up small negative eigenvalues (a few
# times 1e-2 at the strongest-decoherence presets, independent of step size).
# We therefore monitor positivity and only abort on gross violations.
POSITIVITY_TOL = -5e-2


def dissipative_kernel(params: SystemParams, delta: float, t: float,
                       temperature: float | None = None, *,
                       grid: MomentumGrid | None = None,
                       tol: float | None = None) -> float:
    """G(delta, t) = sum'_q d_q sin(w_q t)/w_q (2N_q+1) cos(q delta a); J^2 s units."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if t == 0 or params.coupling.kappa == 0.0:
        return 0.0
    if temperature is None:
        temperature = params.bec.temperature
    sep = delta * params.derived.site_spacing

    def radial(q):
        _, hw = dispersion(params, q)
        w = hw / HBAR
        occ = 2.0 * thermal_occupation(hw, temperature) + 1.0
        return coupling_density(params, q) * np.sin(w * t) / w * occ

    if grid is not None:
        return grid.assemble(radial, sep)
    return assemble_converged(params, radial, sep, tol=tol,
                              phase=oscillation_phase(params, t, sep),
                              abs_floor=abs(dissipative_scale(params)))


def dissipative_scale(params: SystemParams) -> float:
    """Magnitude scale for the kernel's relative-convergence floor."""
    gn0 = params.bec.g * params.bec.density
    return params.coupling.kappa ** 2 * params.bec.density * HBAR / max(gn0, 1e-300) \
        / params.derived.healing_length ** params.bec.dimension


def coherent_kernel(params: SystemParams, delta: float, t: float, *,
                    grid: MomentumGrid | None = None,
                    tol: float | None = None) -> float:
    """sum'_q d_q (1 - cos w_q t)/(hbar w_q) 2cos(q delta a) -> 2 V(delta) as t -> inf."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if t == 0 or params.coupling.kappa == 0.0:
        return 0.0
    sep = delta * params.derived.site_spacing

    def radial(q):
        _, hw = dispersion(params, q)
        return coupling_density(params, q) * 4.0 * np.sin(hw / HBAR * t / 2.0) ** 2 / hw

    if grid is not None:
        return grid.assemble(radial, sep)
    return assemble_converged(params, radial, sep, tol=tol,
                              phase=oscillation_phase(params, t, sep))


@dataclass(frozen=True)
class KernelCache:
    """Integrated dephasing exponents Phi(delta, t_k) on the integrator grid."""

    times: np.ndarray        # (n_times,)
    phi: np.ndarray          # (n_times, n_sites) - Phi at separation delta sites
    n_nodes: int


def dephasing_exponent_table(params: SystemParams, n_sites: int, times,
                             temperature: float | None = None,
                             tol: float | None = None) -> KernelCache:
    """Phi(delta, t) for delta = 0..n_sites-1 on a shared converged node set.

    The node count is converged on the worst case (largest t, largest
    separation), then one kernel matrix serves every time slice via a matmul.
    """
    if temperature is None:
        temperature = params.bec.temperature
    if tol is None:
        tol = params.grid.tolerance
    times = np.asarray(times, dtype=float)
    a = params.derived.site_spacing
    seps = np.arange(n_sites) * a
    t_end = float(times.max())
    phase = oscillation_phase(params, t_end, seps[-1] if n_sites > 1 else 0.0)

    def radial_at(t, q):
        _, hw = dispersion(params, q)
        occ = 2.0 * thermal_occupation(hw, temperature) + 1.0
        return (coupling_density(params, q) * 2.0 * np.sin(hw / HBAR * t / 2.0) ** 2
                * occ / hw ** 2)

    def worst(grid):
        f = radial_at(t_end, grid.q)
        return (grid.assemble(f, 0.0),
                grid.assemble(f, seps[-1]) if n_sites > 1 else 0.0)

    n = initial_panels(phase)
    grid = make_grid(params, n_panels=n)
    ref = worst(grid)
    while True:
        if n >= _MAX_PANELS:
            raise AccuracyError("kernel-cache quadrature did not converge")
        n *= 2
        grid = make_grid(params, n_panels=n)
        val = worst(grid)
        scale = max(abs(val[0]), abs(val[1]), 1e-300)
        if max(abs(val[0] - ref[0]), abs(val[1] - ref[1])) <= tol * scale:
            break
        ref = val

    kmat = grid.kernel_matrix(seps)          # (nodes, n_sites)
    _, hw = dispersion(params, grid.q)
    occ = 2.0 * thermal_occupation(hw, temperature) + 1.0
    amp = coupling_density(params, grid.q) * occ / hw ** 2
    w_half = hw / (2.0 * HBAR)
    phi = np.empty((times.size, n_sites))
    for k, t in enumerate(times):
        if t == 0.0:
            phi[k] = 0.0
            continue
        s = (amp * 2.0 * np.sin(w_half * t) ** 2) @ kmat   # S(delta), all separations
        phi[k] = 2.0 * (s[0] - s)
    return KernelCache(times=times, phi=phi, n_nodes=grid.q.size)


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray          # (n_times, M)
    mean_positions: np.ndarray
    widths: np.ndarray               # sigma_d(t)
    rho_final: np.ndarray
    states: list = field(default_factory=list)
    kernel: KernelCache | None = None
    min_eigenvalue: float = 0.0      # most negative rho eigenvalue seen


def hopping_hamiltonian(params: SystemParams, n_sites: int) -> np.ndarray:
    """H = -J sum |j><j+1| + h.c. + K (j - center) n_j (hard-wall chain)."""
    j_hop = params.lattice.hopping
    h = np.zeros((n_sites, n_sites))
    idx = np.arange(n_sites - 1)
    h[idx, idx + 1] = -j_hop
    h[idx + 1, idx] = -j_hop
    center = (n_sites - 1) / 2.0
    h += np.diag(params.lattice.stark * (np.arange(n_sites) - center))
    return h


def default_steps(params: SystemParams, t_end: float) -> int:
    """Step count from dt = 0.005 hbar / max(J, K), capped sensibly."""
    e_scale = max(params.lattice.hopping, abs(params.lattice.stark))
    if e_scale == 0.0:
        return 100
    dt = 0.005 * HBAR / e_scale
    return max(10, int(math.ceil(t_end / dt)))


def evolve(params: SystemParams, t_end: float, *, rho0: np.ndarray | None = None,
           j0: int | None = None, n_steps: int | None = None,
           temperature: float | None = None, store_states: bool = False,
           kernel: KernelCache | None = None) -> Trajectory:
    """Integrate the master equation to ``t_end`` (s) on ``lattice.sites`` sites.

    Either ``rho0`` (site-basis density matrix) or ``j0`` (initially occupied
    site; default centre) fixes the initial state.  Returns per-step
    populations, mean position and width; ``store_states`` keeps every rho.
    """
    m = params.lattice.sites
    if rho0 is None:
        if j0 is None:
            j0 = m // 2
        rho = np.zeros((m, m), dtype=complex)
        rho[j0, j0] = 1.0
    else:
        rho = np.asarray(rho0, dtype=complex).copy()
        m = rho.shape[0]
        if not np.allclose(rho, rho.conj().T, atol=1e-10):
            raise InvalidParameterError("rho0 must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise InvalidParameterError("rho0 must have unit trace")
    if n_steps is None:
        n_steps = default_steps(params, t_end)
    times = np.linspace(0.0, t_end, n_steps + 1)
    dt = times[1] - times[0]

    h = hopping_hamiltonian(params, m)
    u_half = expm(-1j * h * dt / (2.0 * HBAR))

    dephasing = params.coupling.kappa != 0.0
    if dephasing:
        if kernel is None:
            kernel = dephasing_exponent_table(params, m, times, temperature)
        elif kernel.times.size != times.size or not np.allclose(kernel.times, times):
            raise InvalidParameterError("kernel cache times do not match the step grid")
        sep_idx = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))

    sites = np.arange(m)
    traj = Trajectory(times=times,
                      populations=np.empty((n_steps + 1, m)),
                      mean_positions=np.empty(n_steps + 1),
                      widths=np.empty(n_steps + 1),
                      rho_final=rho, kernel=kernel)

    def record(k, state):
        p = np.real(np.diag(state)).copy()
        traj.populations[k] = p
        traj.mean_positions[k] = float(p @ sites)
        traj.widths[k] = math.sqrt(max(float(p @ (sites - (j0 if j0 is not None else (m - 1) / 2.0)) ** 2), 0.0))
        if store_states:
            traj.states.append(state.copy())

    record(0, rho)
    for k in range(n_steps):
        rho = u_half @ rho @ u_half.conj().T
        if dephasing:
            decay = np.exp(-(kernel.phi[k + 1] - kernel.phi[k]))
            rho *= decay[sep_idx]
        rho = u_half @ rho @ u_half.conj().T
        if (k + 1) % 100 == 0 or k == n_steps - 1:
            tr = np.trace(rho).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise IntegrationError(f"trace drift {tr - 1.0:.3g} at t = {times[k + 1]:.3g}")
            low = float(np.linalg.eigvalsh(rho).min())
            if low < traj.min_eigenvalue:
                traj.min_eigenvalue = low
            if low < POSITIVITY_TOL:
                raise IntegrationError(
                    f"eigenvalue {low:.3g} below {POSITIVITY_TOL} at t = {times[k + 1]:.3g}")
        record(k + 1, rho)
    traj.rho_final = rho
    return traj


@dataclass(frozen=True)
class TransportStats:
    sigma_d: float
    p_bar: float
    p_d: float
    valid: bool = True


def transport_stats(rho_or_populations, j0: float) -> TransportStats:
    """Width sigma_d and fringe statistics (p_bar, p_d) of the density profile.

    sigma_d = sqrt(sum_j p_j (j - j0)^2); the interval I = [j0 - sigma_d,
    j0 + sigma_d] lies between the ballistic wave fronts, and p_bar / p_d are
    the mean and variance density of p_j over I (both divided by 2 sigma_d).
    A point-like profile (sigma_d = 0) yields a flagged empty result.
    """
    arr = np.asarray(rho_or_populations)
    p = np.real(np.diag(arr)) if arr.ndim == 2 else np.real(arr)
    sites = np.arange(p.size)
    var = float(p @ (sites - j0) ** 2)
    if var <= 0.0:
        return TransportStats(sigma_d=0.0, p_bar=math.nan, p_d=math.nan, valid=False)
    sigma = math.sqrt(var)
    lo = int(math.ceil(j0 - sigma))
    hi = int(math.floor(j0 + sigma))
    sel = p[max(lo, 0):hi + 1]
    p_bar = float(np.sum(sel)) / (2.0 * sigma)
    p_d = float(np.sum((sel - p_bar) ** 2)) / (2.0 * sigma)
    return TransportStats(sigma_d=sigma, p_bar=p_bar, p_d=p_d)


def mean_position(rho) -> float:
    """<j> = sum_j j rho_jj."""
    arr = np.asarray(rho)
    p = np.real(np.diag(arr)) if arr.ndim == 2 else np.real(arr)
    return float(p @ np.arange(p.size))
