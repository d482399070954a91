"""Physical constants (CODATA 2018) and mass bookkeeping.

All masses are configured in unified atomic mass units and converted to kg
exactly once, here.  Everything downstream works in SI with angular
frequencies in rad/s; plain Hz only appears at I/O boundaries.
"""

HBAR = 1.054571817e-34      # J s
C = 299792458.0             # m/s
ATOMIC_MASS = 1.66053906660e-27  # kg
ELECTRON_MASS_U = 5.48579909065e-4  # electron mass in u

# Neutral-atom isotope masses in u (AME2020); singly charged ions are these
# minus one electron mass.
MG24_U = 23.985041697
CA40_U = 39.962590863
H1_U = 1.00782503207


def ion_mass_kg(neutral_mass_u: float, charge: int = 1) -> float:
    """Mass of an ion in kg given the neutral species mass in u."""
    return (neutral_mass_u - charge * ELECTRON_MASS_U) * ATOMIC_MASS
