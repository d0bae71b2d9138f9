"""Metropolis Monte Carlo of the hard-core lattice gas with mediated
attraction, cluster statistics, and the analytic 1D/2D reference formulas.

Energy convention: the Hamiltonian is the unrestricted double sum
H = -sum_{i != j} V(|r_i - r_j|) n_i n_j, so each unordered pair contributes
-2 V to the energy.  This is the convention under which the analytic 1D
cluster-number formula (Boltzmann bond factor exp(2|V12|/kT)) is exact; the
corresponding Ising coupling of the 2D nearest-neighbour model is
J_s = (2 V12)/4.

Moves are global single-atom relocations to a uniformly drawn site (rejected
if occupied), which satisfy detailed balance and equilibrate long-range
aggregation quickly.  A local-hop mode restricts targets to the two (1D) or
four (2D) neighbours.  One "step" is one proposed move.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .constants import K_B
from .errors import ConfigurationError, InvalidParameterError, UnsupportedModeError
from .interaction import PotentialTable

_CHUNK = 1 << 20


# ----------------------------------------------------------------------------
# public cluster statistics (pure-python flood fill; the njit twins below are
# used inside the sampling loop and cross-checked against these in tests)

def _neighbors(idx, shape):
    if len(shape) == 1:
        (m,) = shape
        yield ((idx[0] + 1) % m,)
        yield ((idx[0] - 1) % m,)
    else:
        rows, cols = shape
        r, c = idx
        yield ((r + 1) % rows, c)
        yield ((r - 1) % rows, c)
        yield (r, (c + 1) % cols)
        yield (r, (c - 1) % cols)


def _components(config):
    config = np.asarray(config)
    if config.ndim not in (1, 2):
        raise InvalidParameterError("config must be a 1D ring or 2D torus array")
    seen = np.zeros(config.shape, dtype=bool)
    sizes = []
    for idx in zip(*np.nonzero(config)):
        if seen[idx]:
            continue
        size = 0
        queue = deque([idx])
        seen[idx] = True
        while queue:
            p = queue.popleft()
            size += 1
            for nb in _neighbors(p, config.shape):
                if config[nb] and not seen[nb]:
                    seen[nb] = True
                    queue.append(nb)
        sizes.append(size)
    return sizes


def count_clusters(config) -> int:
    """Number of connected components of occupied sites (periodic wrap)."""
    return len(_components(config))


def largest_cluster(config) -> int:
    """Size N_I of the largest connected component (0 for an empty lattice)."""
    sizes = _components(config)
    return max(sizes) if sizes else 0


# ----------------------------------------------------------------------------
# energy

def _table_values(potential, delta_max):
    if isinstance(potential, PotentialTable):
        if potential.delta_max < delta_max:
            raise ConfigurationError(
                f"potential table covers {potential.delta_max} sites, "
                f"need {delta_max}")
        return potential.values[:delta_max + 1]
    vals = np.asarray(potential, dtype=float)
    if vals.size < delta_max + 1:
        raise ConfigurationError(
            f"potential table of length {vals.size} too short for range {delta_max}")
    return vals[:delta_max + 1]


def energy(config, potential, onsite_u: float = 0.0, mode: str = "full",
           delta_max: int = 20) -> float:
    """H = -sum_{i != j} V n_i n_j (+ U/2 sum n(n-1), identically 0 hard-core).

    ``potential`` is a PotentialTable or an array V[separation] of positive
    magnitudes (J).  mode="nn" keeps only V[1]; mode="full" uses separations
    up to ``delta_max`` with the minimum-image convention on the torus.
    Two adjacent atoms therefore contribute -2 V[1].
    """
    config = np.asarray(config)
    if mode not in ("full", "nn"):
        raise UnsupportedModeError(f"unknown potential mode '{mode}'")
    if mode == "nn":
        delta_max = 1
    vals = _table_values(potential, delta_max)
    e = 0.0
    if config.ndim == 1:
        m = config.size
        pos = np.nonzero(config)[0]
        for i in range(pos.size):
            d = np.abs(pos - pos[i])
            d = np.minimum(d, m - d)
            sel = (d >= 1) & (d <= delta_max)
            e -= float(np.sum(vals[d[sel]]))
    elif config.ndim == 2:
        if mode != "nn":
            raise UnsupportedModeError("full-potential mode is 1D only; "
                                       "2D runs are nearest-neighbour")
        bonds = (np.sum(config * np.roll(config, 1, axis=0))
                 + np.sum(config * np.roll(config, 1, axis=1)))
        e = -2.0 * vals[1] * float(bonds)
    else:
        raise InvalidParameterError("config must be 1D or 2D")
    return e  # the U term vanishes identically for hard-core occupations


# ----------------------------------------------------------------------------
# numba kernels

@njit(cache=True)
def _stats_1d(occ):
    m = occ.size
    total = 0
    for j in range(m):
        total += occ[j]
    if total == 0:
        return 0, 0
    if total == m:
        return 1, m
    start = 0
    while occ[start] == 1:
        start += 1
    nc = 0
    largest = 0
    run = 0
    for t in range(m):
        j = start + 1 + t
        if j >= m:
            j -= m
        if occ[j] == 1:
            run += 1
        else:
            if run > 0:
                nc += 1
                if run > largest:
                    largest = run
                run = 0
    if run > 0:
        nc += 1
        if run > largest:
            largest = run
    return nc, largest


@njit(cache=True)
def _stats_2d(occ, side):
    n_sites = side * side
    lab = np.zeros(n_sites, np.uint8)
    stack = np.empty(n_sites, np.int64)
    nc = 0
    largest = 0
    for s in range(n_sites):
        if occ[s] == 1 and lab[s] == 0:
            nc += 1
            size = 0
            top = 1
            stack[0] = s
            lab[s] = 1
            while top > 0:
                top -= 1
                p = stack[top]
                size += 1
                r = p // side
                c = p - r * side
                for k in range(4):
                    if k == 0:
                        nb = ((r + 1) % side) * side + c
                    elif k == 1:
                        nb = ((r - 1) % side) * side + c
                    elif k == 2:
                        nb = r * side + (c + 1) % side
                    else:
                        nb = r * side + (c - 1) % side
                    if occ[nb] == 1 and lab[nb] == 0:
                        lab[nb] = 1
                        stack[top] = nb
                        top += 1
            if size > largest:
                largest = size
    return nc, largest


@njit(cache=True)
def _field_1d(occ, s, vred, m):
    phi = 0.0
    for d in range(1, vred.size):
        jp = s + d
        if jp >= m:
            jp -= m
        jm = s - d
        if jm < 0:
            jm += m
        phi += vred[d] * (occ[jp] + occ[jm])
    return phi


@njit(cache=True)
def _run_chunk_1d(occ, pos, vred, greedy, local, u, step0, equil, interval,
                  nc_buf, ni_buf, e_buf, cfg_buf, record_cfg, n_written, e_state):
    m = occ.size
    n = pos.size
    written = n_written
    e = e_state
    for k in range(u.shape[0]):
        i = int(u[k, 0] * n)
        if i >= n:
            i = n - 1
        s = pos[i]
        if local:
            d = s + 1 if u[k, 1] < 0.5 else s - 1
            if d >= m:
                d -= m
            if d < 0:
                d += m
        else:
            d = int(u[k, 1] * m)
            if d >= m:
                d = m - 1
        if d != s and occ[d] == 0:
            phi_s = _field_1d(occ, s, vred, m)
            occ[s] = 0
            phi_d = _field_1d(occ, d, vred, m)
            d_e = 2.0 * (phi_s - phi_d)
            if greedy:
                ok = d_e <= 0.0
            else:
                ok = d_e <= 0.0 or u[k, 2] < math.exp(-d_e)
            if ok:
                occ[d] = 1
                pos[i] = d
                e += d_e
            else:
                occ[s] = 1
        step = step0 + k + 1
        if step > equil and (step - equil) % interval == 0:
            nc, ni = _stats_1d(occ)
            nc_buf[written] = nc
            ni_buf[written] = ni
            e_buf[written] = e
            if record_cfg:
                code = np.int64(0)
                for j in range(m):
                    if occ[j] == 1:
                        code |= np.int64(1) << j
                cfg_buf[written] = code
            written += 1
    return written, e


@njit(cache=True)
def _field_2d(occ, s, v1, side):
    r = s // side
    c = s - r * side
    up = ((r + 1) % side) * side + c
    dn = ((r - 1) % side) * side + c
    lf = r * side + (c + 1) % side
    rt = r * side + (c - 1) % side
    return v1 * (occ[up] + occ[dn] + occ[lf] + occ[rt])


@njit(cache=True)
def _run_chunk_2d(occ, pos, v1, greedy, local, u, step0, equil, interval,
                  nc_buf, ni_buf, e_buf, n_written, e_state, side):
    n_sites = occ.size
    n = pos.size
    written = n_written
    e = e_state
    for k in range(u.shape[0]):
        i = int(u[k, 0] * n)
        if i >= n:
            i = n - 1
        s = pos[i]
        if local:
            r = s // side
            c = s - r * side
            pick = int(u[k, 1] * 4)
            if pick >= 4:
                pick = 3
            if pick == 0:
                d = ((r + 1) % side) * side + c
            elif pick == 1:
                d = ((r - 1) % side) * side + c
            elif pick == 2:
                d = r * side + (c + 1) % side
            else:
                d = r * side + (c - 1) % side
        else:
            d = int(u[k, 1] * n_sites)
            if d >= n_sites:
                d = n_sites - 1
        if d != s and occ[d] == 0:
            phi_s = _field_2d(occ, s, v1, side)
            occ[s] = 0
            phi_d = _field_2d(occ, d, v1, side)
            d_e = 2.0 * (phi_s - phi_d)
            if greedy:
                ok = d_e <= 0.0
            else:
                ok = d_e <= 0.0 or u[k, 2] < math.exp(-d_e)
            if ok:
                occ[d] = 1
                pos[i] = d
                e += d_e
            else:
                occ[s] = 1
        step = step0 + k + 1
        if step > equil and (step - equil) % interval == 0:
            nc, ni = _stats_2d(occ, side)
            nc_buf[written] = nc
            ni_buf[written] = ni
            e_buf[written] = e
            written += 1
    return written, e


# ----------------------------------------------------------------------------
# driver

@dataclass(frozen=True)
class McRun:
    """One Metropolis chain: the seed fully determines the trajectory."""

    seed: int
    steps: int
    equilibration: int = 0
    sample_interval: int = 1
    temperature: float = 1e-9          # K; ignored in quench mode
    potential_mode: str = "nn"         # "nn" | "full"
    move_mode: str = "global"          # "global" | "local"
    quench: bool = False               # greedy T -> 0 dynamics
    record_configs: bool = False       # bit-packed snapshots (1D, M <= 63)

    def __post_init__(self):
        if self.sample_interval < 1:
            raise InvalidParameterError("sample_interval must be >= 1")
        if self.steps <= self.equilibration:
            raise InvalidParameterError("steps must exceed equilibration")
        if not self.quench and self.temperature <= 0:
            raise InvalidParameterError(
                "T must be positive (set quench=True for greedy T -> 0 dynamics)")
        if self.potential_mode not in ("nn", "full"):
            raise UnsupportedModeError(f"unknown potential mode '{self.potential_mode}'")


@dataclass
class McStats:
    cluster_numbers: np.ndarray
    island_sizes: np.ndarray
    energies: np.ndarray               # J, tracked incrementally
    final_config: np.ndarray
    final_energy: float                # J
    n_atoms: int
    configs: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def mean_cluster_number(self) -> float:
        return float(np.mean(self.cluster_numbers))

    @property
    def std_cluster_number(self) -> float:
        return float(np.std(self.cluster_numbers, ddof=1))

    @property
    def mean_island_size(self) -> float:
        return float(np.mean(self.island_sizes))

    @property
    def std_island_size(self) -> float:
        return float(np.std(self.island_sizes, ddof=1))


def metropolis_run(run: McRun, shape, n_atoms: int, potential,
                   delta_max: int = 20) -> McStats:
    """Run one seeded chain on a 1D ring (shape=M) or 2D torus (shape=(L, L)).

    ``potential`` is a PotentialTable or array of positive magnitudes V[sep]
    in J; only V[1] is used in "nn" mode.  Returns sampled N_c, N_I and energy
    series (one entry every ``sample_interval`` proposals after equilibration).
    """
    shape = (int(shape),) if np.isscalar(shape) else tuple(int(s) for s in shape)
    dim = len(shape)
    if dim == 2 and shape[0] != shape[1]:
        raise ConfigurationError("2D lattice must be a square torus")
    n_sites = int(np.prod(shape))
    if not 0 < n_atoms < n_sites:
        raise InvalidParameterError("need 0 < N < number of sites")
    if dim == 2 and run.potential_mode == "full":
        raise UnsupportedModeError("full-potential mode is 1D only")
    if run.record_configs and (dim != 1 or n_sites > 63):
        raise ConfigurationError("config recording needs a 1D ring with M <= 63")

    if run.potential_mode == "nn":
        delta_max = 1
    vals = _table_values(potential, delta_max)
    kt = K_B * run.temperature if not run.quench else 1.0
    vred = np.ascontiguousarray(vals / kt)   # energies in units of k_B T
    vred[0] = 0.0

    rng = np.random.default_rng(run.seed)
    occ = np.zeros(n_sites, dtype=np.int8)
    pos = rng.choice(n_sites, size=n_atoms, replace=False).astype(np.int64)
    occ[pos] = 1

    n_samples = (run.steps - run.equilibration) // run.sample_interval
    nc_buf = np.empty(n_samples, dtype=np.int64)
    ni_buf = np.empty(n_samples, dtype=np.int64)
    e_buf = np.empty(n_samples, dtype=np.float64)
    cfg_buf = np.empty(n_samples if run.record_configs else 1, dtype=np.int64)

    written = 0
    e_state = 0.0
    if dim == 1:
        e_state = energy(occ, vals, mode=run.potential_mode,
                         delta_max=delta_max) / kt
    else:
        e_state = energy(occ.reshape(shape), vals, mode="nn") / kt

    done = 0
    local = run.move_mode == "local"
    while done < run.steps:
        chunk = min(_CHUNK, run.steps - done)
        u = rng.random((chunk, 3))
        if dim == 1:
            written, e_state = _run_chunk_1d(
                occ, pos, vred, run.quench, local, u, done, run.equilibration,
                run.sample_interval, nc_buf, ni_buf, e_buf, cfg_buf,
                run.record_configs, written, e_state)
        else:
            written, e_state = _run_chunk_2d(
                occ, pos, float(vred[1]), run.quench, local, u, done,
                run.equilibration, run.sample_interval, nc_buf, ni_buf, e_buf,
                written, e_state, shape[0])
        done += chunk

    final = occ.copy().reshape(shape)
    return McStats(
        cluster_numbers=nc_buf[:written],
        island_sizes=ni_buf[:written],
        energies=e_buf[:written] * kt,
        final_config=final,
        final_energy=e_state * kt,
        n_atoms=n_atoms,
        configs=cfg_buf[:written].copy() if run.record_configs else None,
        meta={"step_definition": "one proposed move", "shape": shape,
              "potential_mode": run.potential_mode, "seed": run.seed},
    )


# ----------------------------------------------------------------------------
# analytic references (thermodynamic limit)

def analytic_cluster_number_1d(m_sites: int, n_atoms: int, v12: float,
                               temperature: float) -> float:
    """Equilibrium N_c/N of the 1D ring with nearest-neighbour bond 2|V12|.

    (M/N) [sqrt(1 + 4 N (M-N) (e^{2|V12|/kT} - 1)/M^2) - 1] / (2 (e^{2|V12|/kT} - 1))
    """
    if temperature <= 0:
        raise InvalidParameterError("temperature must be positive")
    if not 0 < n_atoms < m_sites:
        raise InvalidParameterError("need 0 < N < M")
    m, n = float(m_sites), float(n_atoms)
    arg = 2.0 * abs(v12) / (K_B * temperature)
    if arg > 500.0:
        # asymptotic branch: x = e^arg - 1 dominates every other scale
        return math.sqrt((m - n) / n) * math.exp(-arg / 2.0)
    x = math.expm1(arg)
    if x == 0.0:
        return (m - n) / m
    return (m / n) * (math.sqrt(1.0 + 4.0 * n * (m - n) * x / m ** 2) - 1.0) / (2.0 * x)


def analytic_island_size_2d(filling: float, v12: float,
                            temperature: float) -> float:
    """Thermodynamic-limit N_I/N of the 2D lattice gas below its ordering
    temperature; 0 above it.  ``v12`` is the nearest-neighbour bond magnitude
    entering the Ising coupling J_s = |v12|/4; fillings above 1/2 are outside
    the formula's domain.
    """
    if temperature <= 0:
        raise InvalidParameterError("temperature must be positive")
    if not 0 < filling <= 0.5:
        raise InvalidParameterError("filling must lie in (0, 1/2]")
    j_s = abs(v12) / 4.0
    n_r = 1.0 - 2.0 * filling
    sh = math.sinh(2.0 * j_s / (K_B * temperature))
    if sh <= 1.0:
        return 0.0
    n0 = (1.0 - sh ** -4) ** 0.125
    if n0 <= n_r:
        return 0.0
    return (1.0 + n0) * (n0 - n_r) / (2.0 * n0 * (1.0 - n_r))


def transition_temperature(v12: float, n_r: float = 0.0) -> float:
    """Island-formation temperature: k_B T_I = 2 J_s / arsinh[(1 - N_r^8)^(-1/4)]."""
    if not 0.0 <= n_r < 1.0:
        raise InvalidParameterError("N_r must lie in [0, 1)")
    j_s = abs(v12) / 4.0
    return 2.0 * j_s / (math.asinh((1.0 - n_r ** 8) ** -0.25) * K_B)
