"""Physical parameters, derived quantities, and validity-regime checks.

Parameter objects store SI values (kg, m, J, K). The flat config layer
(`from_config`) accepts the lattice-physics units used throughout the rest of
the package's documentation: condensate coupling ``bec.g`` and impurity-BEC
coupling ``coupling.kappa`` in units of E_R * lambda^D, lattice energies
``lattice.J`` / ``lattice.U`` / ``lattice.K`` in units of E_R, temperatures in
nK and the laser wavelength in nm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import HBAR, K_B
from .errors import ConfigurationError, InvalidParameterError

#: dimensionless threshold below which a regime ratio passes silently
REGIME_THRESHOLD = 0.1


@dataclass(frozen=True)
class BecParams:
    """Homogeneous condensate: mass, density (m^-D), coupling g (J m^D), T (K)."""

    mass: float
    density: float
    g: float
    temperature: float = 0.0
    dimension: int = 1

    def __post_init__(self):
        if self.mass <= 0 or self.density <= 0 or self.g <= 0:
            raise InvalidParameterError("mass, density and g must be positive")
        if self.temperature < 0:
            raise InvalidParameterError("temperature must be >= 0")
        if self.dimension not in (1, 2, 3):
            raise InvalidParameterError("dimension must be 1, 2 or 3")


@dataclass(frozen=True)
class LatticeParams:
    """Optical lattice for the second species: wavelength, impurity mass, J, U,
    transverse trap frequency, optional Stark tilt K, site count."""

    wavelength: float
    mass: float
    hopping: float = 0.0
    onsite_u: float = 0.0
    trap_frequency: float = 1.0
    stark: float = 0.0
    sites: int = 2

    def __post_init__(self):
        if self.wavelength <= 0 or self.mass <= 0:
            raise InvalidParameterError("wavelength and mass must be positive")
        if self.trap_frequency <= 0:
            raise InvalidParameterError("trap_frequency must be positive")
        if self.hopping < 0:
            raise InvalidParameterError("hopping J must be >= 0")
        if self.sites < 2:
            raise InvalidParameterError("need at least two lattice sites")


@dataclass(frozen=True)
class CouplingParams:
    """Impurity-condensate coupling.

    ``kappa`` is the bare interspecies coupling (J m^D).  For two internal
    states, ``kappa0``/``kappa1`` are the state-dependent values; defaults
    kappa0 = 0, kappa1 = kappa.  Dephasing depends only on kappa1 - kappa0.
    """

    kappa: float
    kappa0: float = 0.0
    kappa1: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise InvalidParameterError("kappa must be finite")

    @property
    def effective(self) -> float:
        """Coupling difference entering all dephasing expressions."""
        k1 = self.kappa if self.kappa1 is None else self.kappa1
        return k1 - self.kappa0


@dataclass(frozen=True)
class DerivedQuantities:
    healing_length: float   # xi = hbar / sqrt(m_b g n0)
    sound_speed: float      # c = sqrt(g n0 / m_b)
    wannier_width: float    # x0 = sqrt(hbar / (m_b omega_t))
    recoil_energy: float    # E_R = (2 pi hbar)^2 / (2 m_l lambda^2)
    site_spacing: float     # a = lambda / 2


def derive(bec: BecParams, lattice: LatticeParams) -> DerivedQuantities:
    """Compute the derived length/energy scales from their defining formulas."""
    gn0 = bec.g * bec.density
    xi = HBAR / math.sqrt(bec.mass * gn0)
    c = math.sqrt(gn0 / bec.mass)
    x0 = math.sqrt(HBAR / (bec.mass * lattice.trap_frequency))
    e_r = (2.0 * math.pi * HBAR) ** 2 / (2.0 * lattice.mass * lattice.wavelength ** 2)
    return DerivedQuantities(
        healing_length=xi,
        sound_speed=c,
        wannier_width=x0,
        recoil_energy=e_r,
        site_spacing=lattice.wavelength / 2.0,
    )


@dataclass(frozen=True)
class GridOptions:
    """Knobs for momentum grids; see the bogoliubov module."""

    tolerance: float = 1e-8
    q_max_factor: float = 1.0
    n_max: int | None = None


@dataclass(frozen=True)
class SystemParams:
    """Bundle of all physics parameters used by the computational modules."""

    bec: BecParams
    lattice: LatticeParams
    coupling: CouplingParams
    grid: GridOptions = field(default_factory=GridOptions)

    @property
    def derived(self) -> DerivedQuantities:
        return derive(self.bec, self.lattice)

    def with_kappa(self, kappa: float) -> "SystemParams":
        """Copy with a different bare coupling (kappa1 tracks kappa)."""
        return replace(self, coupling=replace(self.coupling, kappa=kappa, kappa1=None))


def thermal_occupation(energy, temperature):
    """Bose occupation 1/(exp(E/kT) - 1) of a mode with energy E = hbar*omega.

    Accepts scalars or arrays for ``energy``; returns 0 at T = 0.
    """
    energy = np.asarray(energy, dtype=float)
    if np.any(energy <= 0):
        raise InvalidParameterError("thermal_occupation needs energy > 0 "
                                    "(zero modes are excluded upstream)")
    if temperature < 0:
        raise InvalidParameterError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(energy)
        return out if out.ndim else float(out)
    x = energy / (K_B * temperature)
    # above x ~ 700 expm1 overflows; the occupation is 0 to double precision
    out = np.where(x < 700.0, 1.0 / np.expm1(np.minimum(x, 700.0)), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RegimeWarning:
    condition: str
    ratio: float
    threshold: float = REGIME_THRESHOLD

    def __str__(self):
        return (f"regime condition '{self.condition}' violated: "
                f"ratio {self.ratio:.3g} >= {self.threshold}")


def validate_regime(params: SystemParams) -> list[RegimeWarning]:
    """Check the perturbative/Markov conditions; returns advisory warnings.

    Conditions: weak impurity-BEC coupling |kappa|/(g n0 xi^D) << 1, sound
    faster than hopping c >> J a / hbar, and the Born condition J >> E_p
    (checked only when J > 0; the J = 0 dynamics are solved exactly).
    """
    d = params.derived
    warnings = []
    ratio = abs(params.coupling.kappa) / (
        params.bec.g * params.bec.density * d.healing_length ** params.bec.dimension)
    if ratio >= REGIME_THRESHOLD:
        warnings.append(RegimeWarning("|kappa|/(g n0 xi^D) << 1", ratio))
    hop_ratio = params.lattice.hopping * d.site_spacing / (HBAR * d.sound_speed)
    if hop_ratio >= REGIME_THRESHOLD:
        warnings.append(RegimeWarning("c >> J a / hbar", hop_ratio))
    if params.lattice.hopping > 0 and params.coupling.kappa != 0:
        from .interaction import polaron_energy
        born = polaron_energy(params) / params.lattice.hopping
        if born >= REGIME_THRESHOLD:
            warnings.append(RegimeWarning("J >> E_p", born))
    return warnings


# ----------------------------------------------------------------------------
# flat config layer

_PHYSICS_KEYS = {
    "bec.mass_kg", "bec.density", "bec.g", "bec.temperature_nK", "bec.dimension",
    "lattice.wavelength_nm", "lattice.mass_kg", "lattice.J", "lattice.U",
    "lattice.K", "lattice.omega_t", "lattice.sites",
    "coupling.kappa", "coupling.kappa0", "coupling.kappa1",
    "grid.tolerance", "grid.q_max_factor", "grid.n_max",
}

#: keys consumed by the CLI / Monte-Carlo drivers rather than SystemParams
_DRIVER_KEYS = {
    "mc.steps", "mc.equilibration", "mc.sample_interval", "mc.seeds",
    "mc.potential_mode", "mc.lattice_sites", "mc.atoms", "mc.snapshot",
    "scan.axis", "scan.start", "scan.stop", "scan.points", "scan.values",
    "run.t_end_ms", "run.separation_sites", "run.delta_max",
}

VALID_KEYS = _PHYSICS_KEYS | _DRIVER_KEYS


def from_config(config: dict) -> SystemParams:
    """Build SystemParams from a flat key-value mapping.

    Energy-like keys (bec.g, coupling.kappa*, lattice.J/U/K) are read in the
    caption units E_R * lambda^D / E_R; see module docstring.  Unknown keys
    raise a ConfigurationError listing the documented schema.
    """
    unknown = set(config) - VALID_KEYS
    if unknown:
        raise ConfigurationError(
            f"unknown config keys {sorted(unknown)}; valid keys: {sorted(VALID_KEYS)}")

    def need(key):
        if key not in config:
            raise ConfigurationError(f"missing required config key '{key}'")
        return config[key]

    lam = float(need("lattice.wavelength_nm")) * 1e-9
    m_l = float(need("lattice.mass_kg"))
    e_r = (2.0 * math.pi * HBAR) ** 2 / (2.0 * m_l * lam ** 2)
    dim = int(config.get("bec.dimension", 1))
    unit_g = e_r * lam ** dim

    bec = BecParams(
        mass=float(need("bec.mass_kg")),
        density=float(need("bec.density")),
        g=float(need("bec.g")) * unit_g,
        temperature=float(config.get("bec.temperature_nK", 0.0)) * 1e-9,
        dimension=dim,
    )
    lattice = LatticeParams(
        wavelength=lam,
        mass=m_l,
        hopping=float(config.get("lattice.J", 0.0)) * e_r,
        onsite_u=float(config.get("lattice.U", 0.0)) * e_r,
        trap_frequency=float(config.get("lattice.omega_t", 1.0)),
        stark=float(config.get("lattice.K", 0.0)) * e_r,
        sites=int(config.get("lattice.sites", 2)),
    )
    kappa1 = config.get("coupling.kappa1")
    coupling = CouplingParams(
        kappa=float(need("coupling.kappa")) * unit_g,
        kappa0=float(config.get("coupling.kappa0", 0.0)) * unit_g,
        kappa1=None if kappa1 is None else float(kappa1) * unit_g,
    )
    n_max = config.get("grid.n_max")
    grid = GridOptions(
        tolerance=float(config.get("grid.tolerance", 1e-8)),
        q_max_factor=float(config.get("grid.q_max_factor", 1.0)),
        n_max=None if n_max is None else int(n_max),
    )
    return SystemParams(bec=bec, lattice=lattice, coupling=coupling, grid=grid)
