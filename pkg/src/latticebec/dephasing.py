"""Dephasing factors for static impurities coupled to the condensate.

The coherence of a single impurity (or of two-impurity states) decays by
Gamma = exp(-A) with the exponent

    A = sum'_q w(q) d_q (1 - cos w_q t)(2 N_q + 1) / (hbar w_q)^2

where the weight w is 1 for the single-atom factor Gamma0 and 2 -+ 2cos(q.dr)
for the two-atom factors Gamma_- (subdecoherent) and Gamma_+ (superdecoherent).
All three are always evaluated on the same quadrature nodes, which makes the
algebraic identity Gamma_+ Gamma_- = Gamma0^4 exact to rounding.

Note: in 1D the t -> infinity (or infinite-separation) limit of the exponent
diverges -- no coherence survives in the thermodynamic limit -- so the
"longtime" evaluation mode is only meaningful in 3D, where it reproduces the
closed-form bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bogoliubov import (MomentumGrid, _MAX_PANELS, coupling_density,
                         dispersion, initial_panels, make_grid,
                         oscillation_phase)
from .constants import HBAR, K_B
from .errors import AccuracyError, InvalidParameterError, UnsupportedModeError
from .params import SystemParams, thermal_occupation


@dataclass(frozen=True)
class GammaTriple:
    """Two-qubit dephasing factors at a given (t, T, separation)."""

    gamma0: float
    gamma_minus: float
    gamma_plus: float
    t: float = math.nan
    temperature: float = math.nan
    separation: float = math.nan

    def as_tuple(self):
        return (self.gamma0, self.gamma_minus, self.gamma_plus)


def _base_radial(params: SystemParams, t: float, temperature: float,
                 time_mode: str):
    """Radial factor d~_q (1 - cos w t)(2N+1)/(hbar w)^2 on |q| arrays."""
    kappa_eff = params.coupling.effective

    def radial(q):
        _, hw = dispersion(params, q)
        dens = coupling_density(params, q, kappa=kappa_eff)
        if time_mode == "longtime":
            osc = 1.0
        else:
            # 2 sin^2(wt/2) is the cancellation-free form of 1 - cos(wt)
            osc = 2.0 * np.sin(hw / HBAR * t / 2.0) ** 2
        occ = 2.0 * thermal_occupation(hw, temperature) + 1.0
        return dens * osc * occ / hw ** 2

    return radial


def dephasing_exponents(params: SystemParams, separation: float, t: float,
                        temperature: float | None = None, *,
                        tol: float | None = None, time_mode: str = "finite",
                        grid: MomentumGrid | None = None):
    """Shared-grid exponents (A0, A_minus, A_plus) for a separation in metres.

    A0 has weight 1, A_-+ have weights 2 -+ 2cos(q.dr); by construction
    A_- + A_+ = 4 A0 exactly.  On an explicit ``grid`` the sums are direct;
    otherwise panels are doubled until both assembled pieces settle to ``tol``.
    """
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if temperature is None:
        temperature = params.bec.temperature
    if time_mode not in ("finite", "longtime"):
        raise UnsupportedModeError(f"unknown time_mode '{time_mode}'")
    if params.coupling.effective == 0.0 or (t == 0.0 and time_mode == "finite"):
        return 0.0, 0.0, 0.0
    if tol is None:
        tol = params.grid.tolerance
    radial = _base_radial(params, t, temperature, time_mode)

    def pieces(g):
        f = radial(g.q)
        return g.assemble(f, 0.0), g.assemble(f, separation)

    if grid is not None:
        a, b = pieces(grid)
    else:
        phase = oscillation_phase(params, t if time_mode == "finite" else 0.0,
                                  separation)
        n = initial_panels(phase)
        a, b = pieces(make_grid(params, n_panels=n))
        while True:
            if n >= _MAX_PANELS:
                raise AccuracyError("dephasing exponent quadrature did not converge",
                                    value=a, residual=None)
            n *= 2
            a2, b2 = pieces(make_grid(params, n_panels=n))
            scale = max(abs(a2), abs(b2), 1e-300)
            if abs(a2 - a) <= tol * scale and abs(b2 - b) <= tol * scale:
                a, b = a2, b2
                break
            a, b = a2, b2
    return a, 2.0 * (a - b), 2.0 * (a + b)


def gamma_triple(params: SystemParams, separation: float, t: float,
                 temperature: float | None = None, *,
                 tol: float | None = None, time_mode: str = "finite",
                 grid: MomentumGrid | None = None) -> GammaTriple:
    """(Gamma0, Gamma_-, Gamma_+) at impurity separation ``separation`` (m)."""
    if temperature is None:
        temperature = params.bec.temperature
    a0, am, ap = dephasing_exponents(params, separation, t, temperature,
                                     tol=tol, time_mode=time_mode, grid=grid)
    return GammaTriple(gamma0=math.exp(-a0), gamma_minus=math.exp(-am),
                       gamma_plus=math.exp(-ap), t=t, temperature=temperature,
                       separation=separation)


def gamma_pair(params: SystemParams, site_gamma: int, site_beta: int, t: float,
               temperature: float | None = None, *,
               tol: float | None = None,
               grid: MomentumGrid | None = None) -> float:
    """Dephasing factor of a coherence between impurity positions gamma, beta.

    exp(-sum'_q |F_beta - F_gamma|^2 (1-cos w t)(2N+1)/(hbar w)^2); equals the
    Gamma_- member of the triple at separation |gamma - beta| * a.  Returns 1
    at t = 0 or for identical sites.
    """
    if site_gamma == site_beta:
        if t < 0:
            raise InvalidParameterError("t must be >= 0")
        return 1.0
    sep = (site_gamma - site_beta) * params.derived.site_spacing
    _, am, _ = dephasing_exponents(params, sep, t, temperature, tol=tol,
                                   grid=grid)
    return math.exp(-am)


@dataclass(frozen=True)
class Bound3d:
    value: float
    regime: str  # "zero_temperature" | "high_temperature"


def gamma_bound_3d(params: SystemParams, temperature: float | None = None,
                   regime: str | None = None) -> Bound3d:
    """Closed-form lower bound on the 3D single-impurity dephasing factor.

    T = 0 (xi >> x0):   exp(-4 kappa^2 / (sqrt2 pi^2 g^2 n0 xi_c^3))
    k_B T >> g n0:      exp(-kappa^2 k_B T / (sqrt2 pi g^3 n0^2 xi_c^3))
    with the reduced healing length xi_c = xi/sqrt(2) in both.  The regime is
    selected by comparing k_B T to g n0 unless forced explicitly.
    """
    if params.bec.dimension != 3:
        raise UnsupportedModeError("closed-form dephasing bounds are 3D only")
    if temperature is None:
        temperature = params.bec.temperature
    g, n0 = params.bec.g, params.bec.density
    xi_c = params.derived.healing_length / math.sqrt(2.0)
    kappa = params.coupling.effective
    if regime is None:
        regime = ("high_temperature" if K_B * temperature > g * n0
                  else "zero_temperature")
    if regime == "zero_temperature":
        expo = 4.0 * kappa ** 2 / (math.sqrt(2.0) * math.pi ** 2 * g ** 2 * n0 * xi_c ** 3)
    elif regime == "high_temperature":
        expo = (kappa ** 2 * K_B * temperature
                / (math.sqrt(2.0) * math.pi * g ** 3 * n0 ** 2 * xi_c ** 3))
    else:
        raise UnsupportedModeError(f"unknown regime '{regime}'")
    return Bound3d(value=math.exp(-expo), regime=regime)


def gamma_bounds_triple_3d(params: SystemParams) -> GammaTriple:
    """T = 0 lower bounds on (Gamma0, Gamma_-, Gamma_+) with exponent weights
    (1, 2, 4) times the base chi = kappa^2/(sqrt2 pi^2 g^2 n0 xi_c^3)."""
    if params.bec.dimension != 3:
        raise UnsupportedModeError("closed-form dephasing bounds are 3D only")
    g, n0 = params.bec.g, params.bec.density
    xi_c = params.derived.healing_length / math.sqrt(2.0)
    chi = (params.coupling.effective ** 2
           / (math.sqrt(2.0) * math.pi ** 2 * g ** 2 * n0 * xi_c ** 3))
    return GammaTriple(gamma0=math.exp(-chi), gamma_minus=math.exp(-2.0 * chi),
                       gamma_plus=math.exp(-4.0 * chi), t=math.inf,
                       temperature=0.0, separation=params.derived.site_spacing)
