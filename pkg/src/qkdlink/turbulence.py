"""Optical turbulence: Hufnagel-Valley profile, Fried parameter, Rytov
variances, aperture-averaged scintillation, the beam-wander chain, and
the dB loss / transmittance conversions.

Everything here is a pure function of its inputs. Quantities that need
the structure-parameter integral accept a precomputed value so sweeps
can reuse one quadrature per scenario.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .quadrature import integrate_piecewise


class WaveModel(enum.Enum):
    """Wave geometry for scintillation: plane for downlink (the beam is
    distorted only on arrival), spherical for uplink (turbulence starts
    at the transmitter)."""

    PLANE = "plane"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class TurbulenceProfile:
    """Hufnagel-Valley profile parameters: ground strength A (m^-2/3)
    and the high-altitude wind speed v (m/s)."""

    hv_a: float
    hv_v: float = 21.0


@dataclass(frozen=True)
class BeamWanderInputs:
    """Inputs of the uplink beam-wander chain.

    ``w_recv`` is the long-term beam radius at the receiver and ``l``
    the slant distance; ``r0`` may be ``math.inf`` to mean a
    turbulence-free path.
    """

    satellite_altitude_m: float
    ground_altitude_m: float
    zenith_rad: float
    w0_m: float
    r0_m: float
    cr: float
    w_recv_m: float
    l_m: float


def cn2_profile(h_m: float, profile: TurbulenceProfile) -> float:
    """Structure parameter Cn^2(h) in m^-2/3 at altitude ``h_m``."""
    if h_m < 0.0:
        raise DomainError("altitude must be >= 0")
    wind = 0.00594 * (profile.hv_v / 27.0) ** 2 * (1e-5 * h_m) ** 10 * math.exp(-h_m / 1000.0)
    mid = 2.7e-16 * math.exp(-h_m / 1500.0)
    ground = profile.hv_a * math.exp(-h_m / 100.0)
    return wind + mid + ground


def _profile_breakpoints(top_m: float) -> list[float]:
    # The three profile terms decay on 100 m / 1500 m scales and the
    # wind term peaks near 10 km; splitting there keeps the adaptive
    # rule from overlooking narrow structure on a 500 km interval.
    candidates = [0.0, 200.0, 1000.0, 3000.0, 8000.0, 12000.0, 20000.0, 50000.0, top_m]
    return [p for p in candidates if p <= top_m]


def cn2_path_integral(
    profile: TurbulenceProfile,
    lo_m: float,
    hi_m: float,
    rel_tol: float = 1e-10,
) -> float:
    """Integral of Cn^2(h) dh over [lo_m, hi_m] in m^(1/3)."""
    if hi_m <= lo_m:
        return 0.0
    points = sorted({lo_m, hi_m} | {p for p in _profile_breakpoints(hi_m) if lo_m < p < hi_m})
    return integrate_piecewise(lambda h: cn2_profile(h, profile), points, rel_tol=rel_tol)


def cn2_average(
    profile: TurbulenceProfile,
    satellite_altitude_m: float,
    atmospheric_thickness_m: float,
    rel_tol: float = 1e-10,
) -> float:
    """Integral average of Cn^2 over [0, H], rescaled by the fixed
    thickness t: (1/t) * integral."""
    if satellite_altitude_m <= 0.0 or atmospheric_thickness_m <= 0.0:
        raise DomainError("altitude and thickness must be > 0")
    return cn2_path_integral(profile, 0.0, satellite_altitude_m, rel_tol) / atmospheric_thickness_m


def cn2_from_micrometeorology(pressure: float, temperature_k: float, delta_t_k: float, separation_m: float) -> float:
    """Point estimate of Cn^2 from pressure, temperature and the mean
    square temperature difference over a separation r.

    Utility estimator; the link pipeline uses the altitude profile.
    """
    if temperature_k <= 0.0:
        raise DomainError("temperature must be > 0")
    if separation_m <= 0.0:
        raise DomainError("separation must be > 0")
    ct2 = delta_t_k**2 * separation_m ** (-1.0 / 3.0)
    return 79e-6 * pressure / temperature_k**2 * ct2


def fried_parameter(
    cn2_integral: float,
    zenith_rad: float,
    wavenumber: float,
) -> float:
    """Atmospheric coherence length r0 in metres.

    ``cn2_integral`` is the vertical integral of Cn^2 between the
    ground and the satellite. Returns ``math.inf`` when the integral is
    zero (no turbulence), so vacuum cases compose without special
    casing downstream.
    """
    if cn2_integral < 0.0:
        raise DomainError("the Cn^2 integral cannot be negative")
    if cn2_integral == 0.0:
        return math.inf
    sec = 1.0 / math.cos(zenith_rad)
    return (0.423 * wavenumber**2 * sec * cn2_integral) ** (-3.0 / 5.0)


def rytov_variance(cn2: float, wavenumber: float, path_m: float, wave: WaveModel) -> float:
    """Rytov variance 1.23 * Cn^2 * k^(7/6) * L^(11/6); the spherical
    wave carries the 0.4 factor."""
    if cn2 < 0.0 or path_m < 0.0:
        raise DomainError("inputs must be >= 0")
    plane = 1.23 * cn2 * wavenumber ** (7.0 / 6.0) * path_m ** (11.0 / 6.0)
    if wave is WaveModel.SPHERICAL:
        return 0.4 * plane
    return plane


def aperture_parameter(wavenumber: float, receiver_diameter_m: float, path_m: float) -> float:
    """Dimensionless aperture parameter d = sqrt(k * d_r^2 / (4 L))."""
    if path_m <= 0.0:
        raise DomainError("path length must be > 0")
    return math.sqrt(wavenumber * receiver_diameter_m**2 / (4.0 * path_m))


_COEFFS = {WaveModel.PLANE: (0.65, 1.11), WaveModel.SPHERICAL: (0.18, 0.56)}


def scintillation_index(rytov: float, d: float, wave: WaveModel) -> float:
    """Aperture-averaged scintillation index sigma_I^2(d_r).

    Valid from weak fluctuations into saturation; reduces to the Rytov
    variance for small inputs and point apertures.
    """
    if rytov < 0.0:
        raise DomainError("the Rytov variance cannot be negative")
    if rytov == 0.0:
        return 0.0
    c1, c2 = _COEFFS[wave]
    s125 = rytov ** (6.0 / 5.0)  # sigma^(12/5) written via sigma^2
    d2 = d * d
    term1 = 0.49 * rytov / (1.0 + c1 * d2 + c2 * s125) ** (7.0 / 6.0)
    term2 = (
        0.51 * rytov * (1.0 + 0.69 * s125) ** (-5.0 / 6.0)
        / (1.0 + 0.90 * d2 + 0.62 * d2 * s125)
    )
    return math.exp(term1 + term2) - 1.0


def beam_wander_variance(inp: BeamWanderInputs, wavelength_m: float) -> float:
    """Variance of the beam-centroid displacement <r_c^2> in m^2."""
    if math.isinf(inp.r0_m):
        return 0.0
    if inp.r0_m <= 0.0:
        raise DomainError("the Fried parameter must be positive")
    sec = 1.0 / math.cos(inp.zenith_rad)
    height = inp.satellite_altitude_m - inp.ground_altitude_m
    return (
        0.54
        * height**2
        * sec**2
        * (wavelength_m / (2.0 * inp.w0_m)) ** 2
        * (2.0 * inp.w0_m / inp.r0_m) ** (5.0 / 3.0)
    )


def pointing_error_variance(rc2_m2: float, w0_m: float, r0_m: float, cr: float) -> float:
    """Effective pointing-error variance sigma_pe^2 <= <r_c^2>.

    The bracket removes the slow wander component a tracking loop with
    scaling constant Cr follows; larger Cr tracks more of it out.
    """
    if rc2_m2 < 0.0:
        raise DomainError("the wander variance cannot be negative")
    if rc2_m2 == 0.0 or math.isinf(r0_m):
        return 0.0
    x = cr**2 * w0_m**2 / r0_m**2
    return rc2_m2 * (1.0 - (x / (1.0 + x)) ** (1.0 / 6.0))


def beam_wander_scintillation(inp: BeamWanderInputs, pointing_variance_m2: float) -> float:
    """Longitudinal scintillation produced by beam wander.

    Uses the angular pointing error alpha_pe = sigma_pe / L against the
    long-term beam radius W at the receiver.
    """
    if inp.w_recv_m <= 0.0 or inp.l_m <= 0.0:
        raise DomainError("receiver beam radius and path length must be > 0")
    if pointing_variance_m2 <= 0.0 or math.isinf(inp.r0_m):
        return 0.0
    sec = 1.0 / math.cos(inp.zenith_rad)
    height = inp.satellite_altitude_m - inp.ground_altitude_m
    alpha_pe = math.sqrt(pointing_variance_m2) / inp.l_m
    return (
        5.95
        * height**2
        * sec**2
        * (2.0 * inp.w0_m / inp.r0_m) ** (5.0 / 3.0)
        * (alpha_pe / inp.w_recv_m) ** 2
    )


def loss_db(sigma2: float, threshold_prob: float) -> float:
    """Scintillation (or beam-wander) loss in dB, always <= 0.

    The bracket 3.3 - 5.77 * sqrt(-ln p_thr) must be negative, which
    bounds p_thr below exp(-(3.3/5.77)^2) ~ 0.721.
    """
    if sigma2 < 0.0:
        raise DomainError("the scintillation index cannot be negative")
    if not 0.0 < threshold_prob < 0.721:
        raise DomainError("threshold probability must be in (0, 0.721) to keep the loss negative")
    bracket = 3.3 - 5.77 * math.sqrt(-math.log(threshold_prob))
    return bracket * sigma2**0.4


def eta_from_db(a_db: float) -> float:
    """Transmittance 10^(a/10) of a non-positive dB loss."""
    if a_db > 0.0:
        raise DomainError("a transmittance loss must be <= 0 dB")
    return 10.0 ** (a_db / 10.0)
