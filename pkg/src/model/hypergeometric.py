"""
Gauss hypergeometric function for the capture integral, 2F1(1, b; b+1; -z) with b = 2/eta.

Three expansions cover z >= 0:
  * z small:  b * sum_k (-z)^k / (b+k)
  * z medium: Pfaff transform, (1+z)^-1 * sum_k k!/(b+1)_k * w^k with w = z/(1+z)
  * z large:  b*pi/sin(pi b) * z^-b - (b/z) * sum_k (-1/z)^k / (k+1-b)
"""
import math

from src import config
from src.model.errors import DomainError, NumericalConvergenceError


def _sum_until_converged(first_term: float, next_term, label: str) -> float:
    total = first_term
    term = first_term
    for k in range(config.HYP2F1_MAX_TERMS):
        term = next_term(k, term)
        total += term
        if abs(term) < config.HYP2F1_RELATIVE_TOLERANCE * abs(total):
            return total
    raise NumericalConvergenceError(
        f"{label} series did not converge within {config.HYP2F1_MAX_TERMS} terms "
        f"(last term {term:.3e}, partial sum {total:.3e})"
    )


def _direct_series(b: float, z: float) -> float:
    def next_term(k: int, term: float) -> float:
        return -term * z * (b + k) / (b + k + 1)

    return b * _sum_until_converged(1.0 / b, next_term, "direct")


def _pfaff_series(b: float, z: float) -> float:
    w = z / (1.0 + z)

    def next_term(k: int, term: float) -> float:
        return term * (k + 1) / (b + 1 + k) * w

    return _sum_until_converged(1.0, next_term, "Pfaff") / (1.0 + z)


def _large_argument_series(b: float, z: float) -> float:
    def next_term(k: int, term: float) -> float:
        return -term / z * (k + 1 - b) / (k + 2 - b)

    tail = _sum_until_converged(1.0 / (1.0 - b), next_term, "large-argument")
    return b * math.pi / math.sin(math.pi * b) * z ** (-b) - b / z * tail


def hyp2f1_capture(eta: float, z: float) -> float:
    """
    Evaluate 2F1(1, 2/eta; 1 + 2/eta; -z), the normalised interference integral
    of the capture probability. Equals the integral over u in [0, 1] of
    1 / (1 + z * u^(eta/2)).

    :param eta: Path-loss exponent, strictly greater than 2.
    :param z: Non-negative argument (R^eta / (theta d1^eta) in the capture formula).
    :return: Value in (0, 1].
    :raises DomainError: If eta <= 2, z < 0 or z is not finite.
    :raises NumericalConvergenceError: If a series exceeds the configured term budget.
    """
    if not eta > 2:
        raise DomainError(f"hyp2f1_capture needs eta > 2, got {eta}")
    if not (z >= 0 and math.isfinite(z)):
        raise DomainError(f"hyp2f1_capture needs a finite z >= 0, got {z}")
    if z == 0:
        return 1.0

    b = 2.0 / eta
    if z <= config.HYP2F1_SERIES_SWITCH:
        value = _direct_series(b, z)
    elif z <= config.HYP2F1_INVERSION_SWITCH:
        value = _pfaff_series(b, z)
    else:
        value = _large_argument_series(b, z)
    return min(1.0, value)
