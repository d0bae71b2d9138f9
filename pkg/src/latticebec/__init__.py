"""Impurity atoms in an optical lattice immersed in a Bose-Einstein condensate.

Phonon-mediated interactions, qubit dephasing and gate fidelity, thermal
clustering, and coherent-to-diffusive transport under a quantum master
equation.
"""

__version__ = "0.1.0"

from .params import (BecParams, CouplingParams, DerivedQuantities,  # noqa: F401
                     GridOptions, LatticeParams, SystemParams, derive,
                     from_config, thermal_occupation, validate_regime)
