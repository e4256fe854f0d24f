"""
Post-decoding outage of the replication schemes as a function of the link outage o.

Every copy of a period is lost independently with probability o. A message is
lost when its m uncoded copies are lost and none of the 2n recovery chains
(one backwards and one forwards per coded message) delivers it.
"""
from dataclasses import dataclass

from src import config
from src.model.errors import DomainError, ProbabilityRangeError
from src.model.params import SchemeConfig


@dataclass(frozen=True)
class SchemeOutage:
    config: SchemeConfig
    link_outage: float
    final_outage: float


def clamp_probability(value: float, label: str = "probability") -> float:
    """
    Snap floating-point excursions just outside [0, 1] back onto the interval.

    :raises ProbabilityRangeError: If the excursion exceeds the configured tolerance.
    """
    tol = config.PROBABILITY_CLAMP_TOLERANCE
    if value < 0.0:
        if value < -tol:
            raise ProbabilityRangeError(f"{label} = {value!r} is below 0")
        return 0.0
    if value > 1.0:
        if value > 1.0 + tol:
            raise ProbabilityRangeError(f"{label} = {value!r} is above 1")
        return 1.0
    return value


def _check_outage(o: float) -> float:
    if not -config.PROBABILITY_CLAMP_TOLERANCE <= o <= 1.0 + config.PROBABILITY_CLAMP_TOLERANCE:
        raise DomainError(f"Link outage must lie in [0, 1], got {o}")
    return min(1.0, max(0.0, o))


def outage_rt(o: float, m: int) -> float:
    """All m replicas lost: o^m."""
    o = _check_outage(o)
    return clamp_probability(o ** m, "RT outage")


def outage_ct(o: float, n: int) -> float:
    """Coded transmission with n XOR combinations: o^(2n+1) * (1+o+o^2-5o^3+4o^4-o^5)^(2n)."""
    o = _check_outage(o)
    chain = 1.0 + o + o ** 2 - 5.0 * o ** 3 + 4.0 * o ** 4 - o ** 5
    return clamp_probability(o ** (2 * n + 1) * chain ** (2 * n), "CT outage")


def event_prob(o: float, m: int, r: int) -> float:
    """
    Probability that one recovery chain delivers the message, reaching up to three
    periods away:
    (1-o^m)(1-o^r) + o^m(1-o^m)(1-o^r)^2 + o^2m(1-o^m)(1-o^r)^3.
    """
    o = _check_outage(o)
    a = o ** m
    u = 1.0 - o ** r
    return clamp_probability((1.0 - a) * u * (1.0 + a * u + a * a * u * u), "chain success")


def event_miss_prob(o: float, m: int, r: int) -> float:
    """
    1 - event_prob written as a sum of non-negative terms, so it keeps full relative
    precision when o is small.
    """
    o = _check_outage(o)
    a = o ** m
    c = o ** r
    u = 1.0 - c
    value = c + a ** 3 * u + a * c * (1.0 - a) * u * (1.0 + 2.0 * a - a * c)
    return clamp_probability(value, "chain failure")


def outage_ht(o: float, m: int, n: int, r: int) -> float:
    """
    Hybrid transmission: o^m * (1 - E)^(2n), the uncoded copies all lost and every
    one of the 2n independent chains failing.
    """
    miss = event_miss_prob(o, m, r)
    return clamp_probability(_check_outage(o) ** m * miss ** (2 * n), "HT outage")


def outage_ht_expanded(o: float, m: int, n: int, r: int) -> float:
    """
    The same outage in its expanded polynomial form, o^(m(2n+1)) * F^(2n) with
    F = o^2m + (1-o^m)(o^(m+3r) - o^2r - 3o^(m+2r)) + o^r (1 + o^-m + o^m - 3o^2m).
    Carries o^-m, so it loses precision as o -> 0; kept as an independent check.
    """
    o = _check_outage(o)
    if o == 0.0:
        return 0.0
    a = o ** m
    f = (o ** (2 * m)
         + (1.0 - a) * (o ** (m + 3 * r) - o ** (2 * r) - 3.0 * o ** (m + 2 * r))
         + o ** r * (1.0 + o ** (-m) + a - 3.0 * o ** (2 * m)))
    return clamp_probability(o ** (m * (2 * n + 1)) * f ** (2 * n), "HT outage (expanded)")


def final_outage(scheme: SchemeConfig, o: float) -> float:
    if scheme.kind == "DT":
        return clamp_probability(_check_outage(o), "DT outage")
    if scheme.kind == "RT":
        return outage_rt(o, scheme.m)
    if scheme.kind == "CT":
        return outage_ct(o, scheme.n)
    return outage_ht(o, scheme.m, scheme.n, scheme.r)


def scheme_outage(scheme: SchemeConfig, o: float) -> SchemeOutage:
    """Dispatch to the closed form of the scheme's kind; DT passes o through."""
    return SchemeOutage(config=scheme, link_outage=o, final_outage=final_outage(scheme, o))
