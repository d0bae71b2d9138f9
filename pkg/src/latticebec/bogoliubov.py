"""Bogoliubov dispersion, impurity-phonon coupling, and momentum grids.

All momentum-space sums in the package are either finite ring sums
(1/Omega) * sum_q with q = 2 pi n / L, or thermodynamic-limit integrals
int d^D q / (2 pi)^D.  Both are represented by a MomentumGrid whose
``assemble`` method integrates an isotropic radial function against the
separation kernel cos(q . r) with the angular average done analytically:
cos(qr) in 1D, J0(qr) in 2D, sinc(qr) in 3D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .constants import HBAR
from .errors import AccuracyError, ConfigurationError, InvalidParameterError
from .params import SystemParams

_PANEL_ORDER = 32
_MAX_PANELS = 1 << 16


def dispersion(params: SystemParams, q):
    """Free and Bogoliubov energies (eps_q, hbar*omega_q) at wavenumber |q|.

    ``q`` is a scalar or array of radial wavenumbers; q = 0 is excluded.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q == 0):
        raise InvalidParameterError("q = 0 is excluded (zero energy mode)")
    gn0 = params.bec.g * params.bec.density
    eps = (HBAR * q) ** 2 / (2.0 * params.bec.mass)
    hw = np.sqrt(eps * (eps + 2.0 * gn0))
    if eps.ndim == 0:
        return float(eps), float(hw)
    return eps, hw


def form_factor(params: SystemParams, q_vec, site, volume: float):
    """Gaussian-Wannier form factor f_j(q) = Omega^{-1/2} e^{i q.r_j} e^{-q^2 x0^2/4}.

    ``q_vec`` is a D-vector, ``site`` the integer site index along the lattice
    axis (r_j = j * a * e_x), ``volume`` the quantization volume Omega (m^D).
    """
    d = params.derived
    q_vec = np.asarray(q_vec, dtype=float)
    r = site * d.site_spacing
    q2 = float(np.dot(q_vec, q_vec))
    return (volume ** -0.5 * np.exp(1j * q_vec.flat[0] * r)
            * math.exp(-0.25 * q2 * d.wannier_width ** 2))


def coupling(params: SystemParams, q_vec, site, volume: float):
    """Impurity-phonon coupling F_{j,q} = kappa sqrt(n0 eps_q / hbar omega_q) f_j(q)."""
    q_vec = np.asarray(q_vec, dtype=float)
    qr = math.sqrt(float(np.dot(q_vec, q_vec)))
    eps, hw = dispersion(params, qr)
    return (params.coupling.kappa * math.sqrt(params.bec.density * eps / hw)
            * form_factor(params, q_vec, site, volume))


def coupling_weight(params: SystemParams, q, volume: float):
    """Mode weight d_q = |F_{j,q}|^2 (site independent), so F = sqrt(d_q) e^{i q.r_j}."""
    return coupling_density(params, q) / volume


def coupling_density(params: SystemParams, q, kappa: float | None = None):
    """Volume-scaled weight Omega * d_q = kappa^2 n0 (eps/hbar omega) e^{-q^2 x0^2/2}.

    This is the quantity entering thermodynamic-limit integrals
    int d^D q/(2 pi)^D; units J^2 m^D.  Vectorized over radial |q|.
    ``kappa`` overrides the bare coupling (used for state-dependent couplings
    where only kappa1 - kappa0 enters).
    """
    if kappa is None:
        kappa = params.coupling.kappa
    d = params.derived
    q = np.asarray(q, dtype=float)
    eps, hw = dispersion(params, q)
    out = (kappa ** 2 * params.bec.density * (eps / hw)
           * np.exp(-q ** 2 * d.wannier_width ** 2 / 2.0))
    return float(out) if out.ndim == 0 else out


def default_q_max(params: SystemParams) -> float:
    """Radial cutoff: the Gaussian factor and the dispersion tail make the
    integrand negligible beyond max(8/x0, 20/xi)."""
    d = params.derived
    return params.grid.q_max_factor * max(8.0 / d.wannier_width,
                                          20.0 / d.healing_length)


@dataclass(frozen=True)
class MomentumGrid:
    """Radial nodes and weights for momentum-space sums; see module docstring.

    For ``kind == "finite"`` (1D ring of volume L) the nodes are the positive
    modes q_n = 2 pi n / L, n = 1..n_max, each standing for the +-q pair; the
    zero mode is excluded.  For ``kind == "thermodynamic"`` the nodes are
    Gauss-Legendre panel nodes on (0, q_max].
    """

    dimension: int
    kind: str
    q: np.ndarray
    weights: np.ndarray
    q_max: float
    volume: float | None = None

    def kernel(self, separation: float) -> np.ndarray:
        """Per-node angular kernel (including measure factors) at separation r."""
        q, r = self.q, float(separation)
        if self.kind == "finite":
            return (2.0 / self.volume) * np.cos(q * r)
        if self.dimension == 1:
            return np.cos(q * r) / math.pi
        if self.dimension == 2:
            return q * j0(q * r) / (2.0 * math.pi)
        return q ** 2 * np.sinc(q * r / math.pi) / (2.0 * math.pi ** 2)

    def assemble(self, radial_values, separation: float = 0.0) -> float:
        """Sum/integral of an isotropic radial function against cos(q . r).

        ``radial_values`` is the function evaluated on ``self.q`` (array), or a
        callable.  Returns (1/Omega) sum_q f cos(q.r) on finite grids and
        int d^D q/(2 pi)^D f(q) <cos(q.r)>_ang in the thermodynamic limit.
        """
        f = radial_values(self.q) if callable(radial_values) else np.asarray(radial_values)
        return float(np.sum(self.weights * f * self.kernel(separation)))

    def kernel_matrix(self, separations) -> np.ndarray:
        """(n_nodes, n_sep) matrix K with assemble(f, r_j) = f @ (w * K[:, j])."""
        cols = [self.weights * self.kernel(r) for r in np.asarray(separations, float)]
        return np.column_stack(cols)


def _check_cutoff(params: SystemParams, q_max: float):
    x0 = params.derived.wannier_width
    if q_max * x0 < 4.0:
        raise ConfigurationError(
            f"momentum cutoff q_max = {q_max:.3g} too small to resolve the "
            f"Gaussian form factor (q_max * x0 = {q_max * x0:.2f} < 4)")


def make_grid(params: SystemParams, mode: str = "thermodynamic", *,
              n_panels: int = 64, q_max: float | None = None,
              length: float | None = None, n_max: int | None = None) -> MomentumGrid:
    """Build a momentum grid.

    mode="thermodynamic": Gauss-Legendre panels (order 32) on (0, q_max] with
    ``n_panels`` equal panels.  mode="finite": 1D ring of length ``length``
    with modes up to ``n_max`` (q_max = 2 pi n_max / length).
    """
    if mode == "finite":
        if params.bec.dimension != 1:
            raise ConfigurationError("finite grids are implemented for D = 1 rings")
        if length is None or n_max is None:
            raise ConfigurationError("finite mode needs length and n_max")
        q = 2.0 * math.pi * np.arange(1, n_max + 1) / length
        _check_cutoff(params, q[-1])
        return MomentumGrid(dimension=1, kind="finite", q=q,
                            weights=np.ones_like(q), q_max=float(q[-1]),
                            volume=float(length))
    if mode != "thermodynamic":
        raise ConfigurationError(f"unknown grid mode '{mode}'")
    if q_max is None:
        q_max = default_q_max(params)
    _check_cutoff(params, q_max)
    x, w = np.polynomial.legendre.leggauss(_PANEL_ORDER)
    edges = np.linspace(0.0, q_max, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid + half * x[None, :]).ravel()
    weights = np.broadcast_to(half * w, (n_panels, _PANEL_ORDER)).ravel().copy()
    return MomentumGrid(dimension=params.bec.dimension, kind="thermodynamic",
                        q=nodes, weights=weights, q_max=float(q_max))


def initial_panels(phase: float) -> int:
    """Panel count heuristic for an integrand with ~phase/2pi oscillations."""
    return int(min(_MAX_PANELS, max(16, math.ceil(phase / (2.0 * math.pi) / 4.0))))


def assemble_converged(params: SystemParams, radial, separation: float = 0.0, *,
                       tol: float | None = None, phase: float = 0.0,
                       abs_floor: float = 0.0):
    """Panel-doubling quadrature of ``radial`` against the separation kernel.

    ``phase`` is an estimate of the total oscillation phase (omega(q_max)*t +
    q_max*r) used to seed the panel count.  Converges until successive
    estimates agree to ``tol`` relative to max(|value|, abs_floor); raises
    AccuracyError if the panel cap is hit first.
    """
    if tol is None:
        tol = params.grid.tolerance
    n = initial_panels(phase)
    grid = make_grid(params, n_panels=n)
    prev = grid.assemble(radial, separation)
    while n < _MAX_PANELS:
        n *= 2
        grid = make_grid(params, n_panels=n)
        val = grid.assemble(radial, separation)
        if abs(val - prev) <= tol * max(abs(val), abs_floor):
            return val
        prev = val
    raise AccuracyError("momentum quadrature did not converge "
                        f"(last residual {abs(val - prev):.3g})",
                        value=val, residual=abs(val - prev))


def oscillation_phase(params: SystemParams, t: float = 0.0,
                      separation: float = 0.0, q_max: float | None = None) -> float:
    """Total phase omega(q_max)*t + q_max*|r| seen by time-dependent integrands."""
    if q_max is None:
        q_max = default_q_max(params)
    _, hw = dispersion(params, q_max)
    return hw / HBAR * abs(t) + q_max * abs(separation)
