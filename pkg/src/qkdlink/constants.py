"""Physical constants (SI, CODATA 2018)."""

SPEED_OF_LIGHT = 299792458.0  # m/s
PLANCK_CONSTANT = 6.62607015e-34  # J s
