"""Two-qubit dephasing channel, Kraus form, phase gate and average fidelity.

Basis order |00>, |01>, |10>, |11>.  The channel acts element-wise on the
4x4 density matrix: diagonal-index elements are untouched, elements whose
index parity i+j+k+l is odd pick up Gamma0, the single-excitation coherences
rho_{01,10}/rho_{10,01} pick up Gamma_- and the double-excitation coherences
rho_{00,11}/rho_{11,00} pick up Gamma_+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .dephasing import GammaTriple
from .errors import (DecompositionUnavailableError, InvalidParameterError,
                     StateError)

_DIM = 4
# parity i+j+k+l of basis indices; even entries are handled case by case
_PARITY = np.array([[(i >> 1) + (i & 1) + (j >> 1) + (j & 1) for j in range(4)]
                    for i in range(4)]) % 2


def _coerce_triple(gamma) -> GammaTriple:
    if isinstance(gamma, GammaTriple):
        t = gamma
    else:
        t = GammaTriple(*gamma)
    for v in t.as_tuple():
        if not (0.0 < v <= 1.0):
            raise InvalidParameterError(f"Gamma components must lie in (0, 1], got {v}")
    return t


def check_state(rho: np.ndarray, *, trace_tol=1e-12, eig_tol=-1e-10) -> np.ndarray:
    """Validate a two-qubit density matrix; returns it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (_DIM, _DIM):
        raise StateError(f"expected a 4x4 density matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise StateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > max(trace_tol, 1e-12):
        raise StateError(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < eig_tol:
        raise StateError("density matrix has a significantly negative eigenvalue")
    return rho


def scaling_matrix(gamma) -> np.ndarray:
    """Element-wise factors applied by the dephasing channel."""
    g = _coerce_triple(gamma)
    s = np.where(_PARITY == 1, g.gamma0, 1.0).astype(float)
    s[1, 2] = s[2, 1] = g.gamma_minus
    s[0, 3] = s[3, 0] = g.gamma_plus
    np.fill_diagonal(s, 1.0)
    return s


def apply_dephasing(rho: np.ndarray, gamma) -> np.ndarray:
    """Exact reduced dynamics of the collective dephasing channel."""
    rho = check_state(rho)
    return rho * scaling_matrix(gamma)


@dataclass(frozen=True)
class KrausSet:
    """Six-operator operator-sum form of the channel (diagonal operators)."""

    operators: tuple
    gamma: GammaTriple

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(e @ rho @ e.conj().T for e in self.operators)


def kraus_set(gamma) -> KrausSet:
    """Operator-sum decomposition; exists iff 1 - 2*Gamma0 + Gamma_+ >= 0 and
    Gamma_- >= Gamma_+ (the element-wise map itself is always available)."""
    g = _coerce_triple(gamma)
    w_zz = (1.0 - 2.0 * g.gamma0 + g.gamma_plus) / 4.0
    w_z = (1.0 - g.gamma_minus) / 4.0
    w_d = (g.gamma_minus - g.gamma_plus) / 4.0
    if w_zz < -1e-15 or w_d < -1e-15:
        raise DecompositionUnavailableError(
            "Kraus weights negative (1 - 2 Gamma0 + Gamma_+ = "
            f"{4 * w_zz:.3g}, Gamma_- - Gamma_+ = {4 * w_d:.3g}); "
            "use the element-wise map instead")
    w1 = (1.0 + 2.0 * g.gamma0 + g.gamma_plus) / 4.0
    sz = np.array([1.0, -1.0])
    diag = lambda v: np.diag(v).astype(float)
    ops = (
        math.sqrt(w1) * np.eye(4),
        math.sqrt(max(w_zz, 0.0)) * diag(np.kron(sz, sz)),
        math.sqrt(max(w_z, 0.0)) * diag(np.kron(sz, np.ones(2))),
        math.sqrt(max(w_z, 0.0)) * diag(np.kron(np.ones(2), sz)),
        math.sqrt(max(w_d, 0.0)) * diag([-1.0, 1.0, 1.0, 1.0]),
        math.sqrt(max(w_d, 0.0)) * diag([1.0, 1.0, 1.0, -1.0]),
    )
    return KrausSet(operators=ops, gamma=g)


def average_fidelity(gamma) -> float:
    """Average gate fidelity of the dephased phase gate: (4 + 4G0 + G- + G+)/10."""
    g = _coerce_triple(gamma)
    return (4.0 + 4.0 * g.gamma0 + g.gamma_minus + g.gamma_plus) / 10.0


def average_fidelity_from_kraus(kraus: KrausSet) -> float:
    """Trace formula (sum_j |tr E_j|^2 + d)/(d(d+1)), d = 4."""
    s = sum(abs(np.trace(e)) ** 2 for e in kraus.operators)
    return (s + _DIM) / (_DIM * (_DIM + 1))


def independent_reservoir_fidelity(gamma0: float) -> float:
    """Fidelity if each qubit dephased independently (Gamma_-+ -> Gamma0^2)."""
    if not (0.0 < gamma0 <= 1.0):
        raise InvalidParameterError("Gamma0 must lie in (0, 1]")
    return (2.0 + 2.0 * gamma0 + gamma0 ** 2) / 5.0


def controlled_phase(phi: float) -> np.ndarray:
    """diag(1, 1, 1, e^{i phi}); phi = pi is the target entangling gate."""
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)])


def gate_time(v12: float) -> float:
    """Phase-gate duration t_g = hbar pi / V12 for interaction energy V12 (J)."""
    if v12 <= 0:
        raise InvalidParameterError("V12 must be positive")
    return HBAR * math.pi / v12
