"""Named parameter sets for the benchmark scenarios.

Each preset returns a flat config dict (see params.from_config for units).
Couplings and densities follow the benchmark scenarios used throughout the
tests; where the trap frequency is a free choice it is set so that the
Gaussian Wannier width is x0 = 0.108 * lambda, which reproduces the quoted
on-site interaction energies (0.03 E_R in 1D, 0.08 E_R in 2D) and the 2D
clustering transition temperature simultaneously.
"""

from __future__ import annotations

import math

from .constants import HBAR, MASS_CS133, MASS_K41, MASS_NA23, MASS_RB87

WAVELENGTH_NM = 790.0


def _omega_t_for_x0(mass: float, x0: float) -> float:
    """Trap frequency giving Wannier width x0 for the given (condensate) mass."""
    return HBAR / (mass * x0 ** 2)


def _omega_t_for_depth(mass: float, depth_er: float, wavelength: float) -> float:
    """Harmonic frequency of a lattice well of the given depth (in recoils)."""
    e_r = (2.0 * math.pi * HBAR) ** 2 / (2.0 * mass * wavelength ** 2)
    return 2.0 * math.sqrt(depth_er) * e_r / HBAR


def dephasing_1d() -> dict:
    """Cs impurities in a 1D Rb condensate; static-impurity dephasing regime."""
    lam = WAVELENGTH_NM * 1e-9
    return {
        "lattice.wavelength_nm": WAVELENGTH_NM,
        "lattice.mass_kg": MASS_CS133,
        "lattice.omega_t": _omega_t_for_depth(MASS_CS133, 40.0, lam) ,
        "bec.mass_kg": MASS_RB87,
        "bec.density": 5e6,
        "bec.g": 4.5e-2,
        "bec.temperature_nK": 5.0,
        "bec.dimension": 1,
        "coupling.kappa": 3.5e-2,
    }


def cluster_1d() -> dict:
    """K-41 in a 1D Rb condensate; thermal clustering on an 800-site ring."""
    return {
        "lattice.wavelength_nm": WAVELENGTH_NM,
        "lattice.mass_kg": MASS_K41,
        "lattice.omega_t": _omega_t_for_x0(MASS_RB87, 0.108 * WAVELENGTH_NM * 1e-9),
        "bec.mass_kg": MASS_RB87,
        "bec.density": 5e6,
        "bec.g": 1.1e-2,
        "bec.temperature_nK": 3.0,
        "bec.dimension": 1,
        "coupling.kappa": 2.5e-2,
        "mc.lattice_sites": 800,
        "mc.atoms": 160,
    }


def cluster_2d() -> dict:
    """K-41 in a 2D Rb condensate; island formation on a square torus."""
    return {
        "lattice.wavelength_nm": WAVELENGTH_NM,
        "lattice.mass_kg": MASS_K41,
        "lattice.omega_t": _omega_t_for_x0(MASS_RB87, 0.108 * WAVELENGTH_NM * 1e-9),
        "bec.mass_kg": MASS_RB87,
        "bec.density": 25e12,
        "bec.g": 5.1e-3,
        "bec.temperature_nK": 2.0,
        "bec.dimension": 2,
        "coupling.kappa": 1.87e-2,
        "mc.lattice_sites": 150,
        "mc.atoms": 900,
    }


def transport_1d() -> dict:
    """Single K-41 atom hopping in a 1D Rb condensate at 100 nK."""
    return {
        "lattice.wavelength_nm": WAVELENGTH_NM,
        "lattice.mass_kg": MASS_K41,
        "lattice.omega_t": _omega_t_for_x0(MASS_RB87, 0.108 * WAVELENGTH_NM * 1e-9),
        "lattice.J": 0.03,
        "lattice.sites": 121,
        "bec.mass_kg": MASS_RB87,
        "bec.density": 5e6,
        "bec.g": 1.1e-2,
        "bec.temperature_nK": 100.0,
        "bec.dimension": 1,
        "coupling.kappa": 1.94e-2,
        "run.t_end_ms": 8.2,
    }


def bloch_1d() -> dict:
    """Tilted-lattice breathing of a single K-41 atom at 75 nK."""
    cfg = transport_1d()
    e_r = (2.0 * math.pi * HBAR) ** 2 / (2.0 * MASS_K41 * (WAVELENGTH_NM * 1e-9) ** 2)
    cfg.update({
        "bec.temperature_nK": 75.0,
        "coupling.kappa": 1.6e-2,
        "lattice.K": 1.5e3 * HBAR / e_r,   # tilt K/hbar = 1.5 kHz
        "lattice.sites": 41,
    })
    return cfg


def gate_3d() -> dict:
    """Cs qubits in a 3D Na condensate; phase-gate benchmark at T = 0."""
    lam = WAVELENGTH_NM * 1e-9
    return {
        "lattice.wavelength_nm": WAVELENGTH_NM,
        "lattice.mass_kg": MASS_CS133,
        "lattice.omega_t": _omega_t_for_depth(MASS_CS133, 40.0, lam),
        "bec.mass_kg": MASS_NA23,
        "bec.density": (5e6) ** 3,
        "bec.g": 1.5e-2,
        "bec.temperature_nK": 0.0,
        "bec.dimension": 3,
        "coupling.kappa": 1.1e-2,
    }


PRESETS = {
    "dephasing_1d": dephasing_1d,
    "cluster_1d": cluster_1d,
    "cluster_2d": cluster_2d,
    "transport_1d": transport_1d,
    "bloch_1d": bloch_1d,
    "gate_3d": gate_3d,
}


def get(name: str) -> dict:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset '{name}'; available: {sorted(PRESETS)}") from None
