"""Detection and coincidence models plus QBER for the four protocols.

Prepare-and-measure (BB84, B92) links see single-detector clicks from
signal, dark counts and stray light; entangled protocols (BBM92, E91)
see coincidences split into true, false and stray components. Noise
contributes to errors with a protocol-specific fraction, and sifting
keeps a protocol-specific share of the raw key.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateLinkError, DomainError


class ProtocolKind(enum.Enum):
    BB84 = "bb84"
    B92 = "b92"
    BBM92 = "bbm92"
    E91 = "e91"

    @property
    def noise_fraction(self) -> float:
        return float(_NOISE_FRACTION[self])

    @property
    def sift_factor(self) -> float:
        return float(_SIFT_FACTOR[self])

    @property
    def entangled(self) -> bool:
        return self in (ProtocolKind.BBM92, ProtocolKind.E91)


# Noise-splitting fraction in the QBER numerator and the sifting factor
# in the keyrate prefactor coincide per protocol: 1/2, 1/4, 1/2, 1/3.
_NOISE_FRACTION = {
    ProtocolKind.BB84: Fraction(1, 2),
    ProtocolKind.B92: Fraction(1, 4),
    ProtocolKind.BBM92: Fraction(1, 2),
    ProtocolKind.E91: Fraction(1, 3),
}
_SIFT_FACTOR = dict(_NOISE_FRACTION)

PREPARE_MEASURE = (ProtocolKind.BB84, ProtocolKind.B92)
ENTANGLED = (ProtocolKind.BBM92, ProtocolKind.E91)


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} = {value} is not a probability")


@dataclass(frozen=True)
class ClickModel:
    """Single-station detection probabilities; p_click is their sum
    (simultaneous events are neglected, all terms being small)."""

    p_signal: float
    p_dark: float
    p_stray: float

    def __post_init__(self):
        for name in ("p_signal", "p_dark", "p_stray"):
            _check_prob(name, getattr(self, name))
        _check_prob("p_click", self.p_click)

    @property
    def p_click(self) -> float:
        return self.p_signal + self.p_dark + self.p_stray


@dataclass(frozen=True)
class CoincidenceModel:
    """Two-station coincidence probabilities; p_coin is their sum."""

    p_true: float
    p_false: float
    p_stray: float

    def __post_init__(self):
        for name in ("p_true", "p_false", "p_stray"):
            _check_prob(name, getattr(self, name))
        _check_prob("p_coin", self.p_coin)

    @property
    def p_coin(self) -> float:
        return self.p_true + self.p_false + self.p_stray


def p_signal(eta_d: float, eta_t: float, mu: float) -> float:
    """Detection probability of a weak coherent pulse:
    1 - exp(-eta_d * eta_T * mu)."""
    if eta_d < 0.0 or eta_t < 0.0 or mu < 0.0:
        raise DomainError("inputs must be >= 0")
    return -math.expm1(-eta_d * eta_t * mu)


def p_dark(d: float) -> float:
    """Dark-click probability 4d of a four-detector passive module."""
    if d < 0.0:
        raise DomainError("dark probability must be >= 0")
    value = 4.0 * d
    if value > 1.0:
        raise DomainError("4d exceeds 1; not a probability")
    return value


def qber_prepare_measure(kind: ProtocolKind, c: float, cm: ClickModel) -> float:
    """QBER of BB84 or B92.

    e = (c * p_signal + frac * (p_dark + p_stray)) / p_click, with
    frac = 1/2 for BB84 and 1/4 for B92. Equals c on a noiseless link
    and tends to frac when the signal vanishes.
    """
    if kind not in PREPARE_MEASURE:
        raise DomainError(f"{kind.value} is not a prepare-and-measure protocol")
    if cm.p_click <= 0.0:
        raise DegenerateLinkError("no detections at all (p_click = 0)")
    noise = cm.p_dark + cm.p_stray
    return (c * cm.p_signal + kind.noise_fraction * noise) / cm.p_click


def coincidence_model(
    eta_det: float,
    eta_t: float,
    d: float,
    p_stray: float,
    split: float = 0.5,
) -> CoincidenceModel:
    """Coincidence probabilities for an entangled pair source.

    Each arm carries the channel transmittance raised to its share of
    the path (eta_T**split and eta_T**(1-split)) and one detector
    efficiency, so p_true = eta_det^2 * eta_T independent of the source
    position. False coincidences pair dark counts with either arm:
    4*alpha_x*d + 4*alpha_(L-x)*d + 16*d^2, minimized at the midpoint.
    """
    if not 0.0 < split < 1.0:
        raise DomainError("split must be in (0, 1)")
    if eta_det < 0.0 or eta_t < 0.0 or d < 0.0:
        raise DomainError("inputs must be >= 0")
    alpha_near = eta_det * eta_t**split
    alpha_far = eta_det * eta_t ** (1.0 - split)
    p_true = eta_det**2 * eta_t
    p_false = 4.0 * alpha_near * d + 4.0 * alpha_far * d + 16.0 * d**2
    return CoincidenceModel(p_true=p_true, p_false=p_false, p_stray=p_stray)


def qber_entangled(kind: ProtocolKind, c: float, cm: CoincidenceModel) -> float:
    """QBER of BBM92 or E91.

    e = (c * p_true + frac * (p_false + p_stray)) / p_coin, with
    frac = 1/2 for BBM92 and 1/3 for E91 (three bases, so a 1/3 basis
    match rate).
    """
    if kind not in ENTANGLED:
        raise DomainError(f"{kind.value} is not an entangled protocol")
    if cm.p_coin <= 0.0:
        raise DegenerateLinkError("no coincidences at all (p_coin = 0)")
    noise = cm.p_false + cm.p_stray
    return (c * cm.p_true + kind.noise_fraction * noise) / cm.p_coin
