"""Secure keyrate arithmetic: privacy amplification, error correction
and the four protocol rate formulas.

Weak-coherent-pulse protocols (BB84, B92) pay a photon-number-splitting
penalty through tau' = tau(e / beta) with beta = (p_click - p') /
p_click, where p' bounds the multiphoton emission probability.
Entangled protocols use tau(e) directly; under a double-blinding attack
the leakage measure tau drops to zero.

All rates are clamped at zero: a negative secure rate means abort.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import DegenerateLinkError, DomainError
from .protocols import ClickModel, CoincidenceModel, ProtocolKind, ENTANGLED, PREPARE_MEASURE


@dataclass(frozen=True)
class SecurityTerms:
    """Privacy-amplification and error-correction terms for one rate."""

    tau: float
    tau_prime: float
    beta_sec: float
    p_prime: float
    f_ec: float


def entropy_term(e: float) -> float:
    """e*log2(e) + (1-e)*log2(1-e), i.e. -H2(e); 0*log2(0) is 0."""
    if not 0.0 <= e <= 1.0:
        raise DomainError("error rate must be in [0, 1]")
    total = 0.0
    if e > 0.0:
        total += e * math.log2(e)
    if e < 1.0:
        total += (1.0 - e) * math.log2(1.0 - e)
    return total


def binary_entropy(e: float) -> float:
    """Shannon binary entropy H2(e)."""
    return -entropy_term(e)


def tau(e: float) -> float:
    """Privacy-amplification discard fraction.

    log2(1 + 4e - 4e^2) below 1/2 and 1 from 1/2 on; continuous at the
    junction and non-decreasing on [0, 1/2].
    """
    if not 0.0 <= e <= 1.0:
        raise DomainError("error rate must be in [0, 1]")
    if e >= 0.5:
        return 1.0
    return math.log2(1.0 + 4.0 * e - 4.0 * e * e)


def p_prime(mu: float) -> float:
    """Multiphoton emission bound
    p' = 1 - (1 + mu + mu^2/2 + mu^3/12) * exp(-mu).

    For small mu the direct form cancels to p' ~ mu^3/12 and loses half
    the mantissa, so below mu = 1 the non-cancelling series
    exp(-mu) * (mu^3/12 + sum_{n>=4} mu^n/n!) is used instead.
    """
    if mu < 0.0:
        raise DomainError("mean photon number must be >= 0")
    if mu == 0.0:
        return 0.0
    if mu > 1.0:
        poly = 1.0 + mu + mu**2 / 2.0 + 0.5 * mu**3 / 6.0
        return 1.0 - poly * math.exp(-mu)
    term = mu**4 / 24.0
    total = mu**3 / 12.0 + term
    n = 4
    while term > total * 1e-18:
        n += 1
        term *= mu / n
        total += term
    return math.exp(-mu) * total


def beta_security(p_click: float, p_prime_value: float) -> float:
    """Security parameter beta = (p_click - p') / p_click."""
    if p_click <= 0.0:
        raise DegenerateLinkError("no detections at all (p_click = 0)")
    return (p_click - p_prime_value) / p_click


def tau_prime(e: float, p_click: float, p_prime_value: float) -> float:
    """tau(e / beta), extended safely to the degenerate region.

    When beta <= 0 (multiphoton bound exceeds the click rate) or
    e / beta reaches 1/2, the whole key is discarded (returns 1).
    """
    beta = beta_security(p_click, p_prime_value)
    if beta <= 0.0:
        return 1.0
    scaled = e / beta
    if scaled >= 0.5:
        return 1.0
    return tau(scaled)


def f_ec(
    e: float,
    constant: float = 1.22,
    table: Optional[Sequence[Tuple[float, float]]] = None,
) -> float:
    """Error-correction inefficiency f(e) >= 1.

    Constant unless a (qber, f) table is supplied, which interpolates
    piecewise linearly and clamps at both ends.
    """
    if not 0.0 <= e <= 1.0:
        raise DomainError("error rate must be in [0, 1]")
    if table is None:
        return constant
    if len(table) == 0:
        raise DomainError("an empty f(e) table has no value to return")
    if e <= table[0][0]:
        return table[0][1]
    if e >= table[-1][0]:
        return table[-1][1]
    for (q0, f0), (q1, f1) in zip(table[:-1], table[1:]):
        if q0 <= e <= q1:
            if q1 == q0:
                return f1
            w = (e - q0) / (q1 - q0)
            return f0 + w * (f1 - f0)
    raise DomainError("f(e) table is not sorted by qber")


def security_terms(
    e: float,
    cm: ClickModel,
    mu: float,
    f: float,
) -> SecurityTerms:
    """Assemble the PNS security terms for a prepare-and-measure rate."""
    p_pr = p_prime(mu)
    return SecurityTerms(
        tau=tau(e),
        tau_prime=tau_prime(e, cm.p_click, p_pr),
        beta_sec=beta_security(cm.p_click, p_pr),
        p_prime=p_pr,
        f_ec=f,
    )


def rate_prepare_measure(
    kind: ProtocolKind,
    cm: ClickModel,
    terms: SecurityTerms,
    e: float,
) -> float:
    """Secure bits per pulse for BB84 (sifting 1/2) or B92 (1/4):

        R = sift * p_click * (1 - tau' + f * (e log2 e + (1-e) log2(1-e)))

    clamped at zero. The entropy term is negative, so the bracket reads
    1 - tau' - f * H2(e).
    """
    if kind not in PREPARE_MEASURE:
        raise DomainError(f"{kind.value} is not a prepare-and-measure protocol")
    if cm.p_click <= 0.0:
        raise DegenerateLinkError("no detections at all (p_click = 0)")
    bracket = 1.0 - terms.tau_prime + terms.f_ec * entropy_term(e)
    return max(0.0, kind.sift_factor * cm.p_click * bracket)


def rate_entangled(
    kind: ProtocolKind,
    cm: CoincidenceModel,
    e: float,
    f: float,
    mode: str = "corrected",
    double_blinding: bool = False,
) -> float:
    """Secure bits per pulse for BBM92 (sifting 1/2) or E91 (1/3).

    The published bracket tau(e) + f * (e log2 e + ...) vanishes even on
    a perfect link (tau(0) = 0), so the default "corrected" mode uses
    the discard-plus-leakage form 1 - tau(e) - f * H2(e), matching the
    prepare-and-measure structure; "verbatim" keeps the original
    bracket for auditability. A double-blinding attack zeroes the
    leakage measure, so tau is replaced by 0 in either mode. Clamped at
    zero.
    """
    if kind not in ENTANGLED:
        raise DomainError(f"{kind.value} is not an entangled protocol")
    if cm.p_coin <= 0.0:
        raise DegenerateLinkError("no coincidences at all (p_coin = 0)")
    tau_term = 0.0 if double_blinding else tau(e)
    if mode == "corrected":
        bracket = 1.0 - tau_term + f * entropy_term(e)
    elif mode == "verbatim":
        bracket = tau_term + f * entropy_term(e)
    else:
        raise DomainError(f"unknown entangled rate mode {mode!r}")
    return max(0.0, kind.sift_factor * cm.p_coin * bracket)
