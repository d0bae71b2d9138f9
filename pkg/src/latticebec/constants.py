"""Physical constants (SI, CODATA 2018) and atomic masses."""

HBAR = 1.054571817e-34      # J s
K_B = 1.380649e-23          # J / K
AMU = 1.66053906892e-27     # kg

# isotope masses in kg
MASS_NA23 = 22.98976928 * AMU
MASS_K41 = 40.96182526 * AMU
MASS_RB87 = 86.909180531 * AMU
MASS_CS133 = 132.905451961 * AMU
