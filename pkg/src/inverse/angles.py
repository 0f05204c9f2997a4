"""
Angle classes and the |c| map

Key features:
- classify_angle: odd pi/(2j+1), even pi/(2m) or generic, with parity
- invariant_vectors: C and C_abs
- inverse_c_preimages / obtuse_preimage: angles with a prescribed |c|
- paired_branch / odd_sum_after_swap / rational_angle_transfer: closed forms used by the enumerators
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from src.geometry.polygon import BoundaryData
from src.spectral.char_poly import c_of_angle
from src.utils.errors import PolygonDataError

AngleKind = Literal["odd", "even", "generic"]


@dataclass(frozen=True)
class AngleClass:
    """
    ``order`` is j for the odd angle pi/(2j+1) and m for the even angle pi/(2m);
    ``denominator`` is the k of pi/k.
    """

    kind: AngleKind
    order: int | None = None
    parity: int | None = None
    denominator: int | None = None

    @property
    def is_odd(self) -> bool:
        return self.kind == "odd"

    @property
    def is_even(self) -> bool:
        return self.kind == "even"

    def label(self) -> str:
        if self.kind == "generic":
            return "generic"
        return f"{self.kind}(pi/{self.denominator}, parity {self.parity:+d})"


GENERIC = AngleClass("generic")


def _class_for_denominator(k: int) -> AngleClass:
    if k % 2:
        j = (k - 1) // 2
        return AngleClass("odd", order=j, parity=(-1) ** j, denominator=k)
    m = k // 2
    return AngleClass("even", order=m, parity=(-1) ** m, denominator=k)


def classify_angle(alpha: float, tol: float = 1e-9) -> AngleClass:
    """Odd/even when alpha is within ``tol`` of the nearest pi/k with k >= 2."""
    if not 0.0 < alpha < math.pi:
        raise PolygonDataError(f"angle {alpha} is outside (0, pi)")
    k = round(math.pi / alpha)
    if k < 2 or abs(alpha - math.pi / k) > tol:
        return GENERIC
    return _class_for_denominator(k)


def classify_angle_pi(q: Fraction) -> AngleClass:
    """Exact classification of the angle q*pi."""
    q = Fraction(q)
    if not 0 < q < 1:
        raise PolygonDataError(f"angle {q}*pi is outside (0, pi)")
    if q.numerator != 1:
        return GENERIC
    return _class_for_denominator(q.denominator)


def classify_angles(data: BoundaryData, tol: float = 1e-9, exact: bool | None = None) -> list[AngleClass]:
    use_exact = data.has_exact_angles if exact is None else exact
    if use_exact:
        if not data.has_exact_angles:
            raise PolygonDataError("exact classification needs angles given as rational multiples of pi")
        return [classify_angle_pi(q) for q in data.exact_angles_pi]
    return [classify_angle(a, tol) for a in data.angles]


@dataclass(frozen=True)
class InvariantVector:
    C: tuple[float, ...]
    C_abs: tuple[float, ...]


def invariant_vectors(data: BoundaryData) -> InvariantVector:
    C = tuple(c_of_angle(a) for a in data.angles)
    return InvariantVector(C=C, C_abs=tuple(abs(c) for c in C))


def inverse_c_preimages(s: float, alpha_min: float, tol: float = 1e-12) -> list[float]:
    """
    Every angle in (alpha_min, pi) with |c| = s, ascending.

    With theta = pi^2/(2 alpha), the branches are theta = +-arccos(+-s) + 2 pi k and
    theta ranges over (pi/2, pi^2/(2 alpha_min)); the set is finite because it
    accumulates only at 0.
    """
    if not 0.0 <= s <= 1.0:
        raise PolygonDataError(f"|c| value {s} is outside [0, 1]")
    if alpha_min <= 0.0:
        raise PolygonDataError("alpha_min must be positive")

    theta_lo = math.pi / 2
    theta_hi = math.pi ** 2 / (2.0 * alpha_min)
    bases = {math.acos(s), -math.acos(s), math.acos(-s), -math.acos(-s)}

    thetas = []
    k_max = int(theta_hi / (2.0 * math.pi)) + 2
    for base in bases:
        for k in range(0, k_max + 1):
            theta = base + 2.0 * math.pi * k
            if theta_lo + tol < theta < theta_hi:
                thetas.append(theta)

    angles = sorted(math.pi ** 2 / (2.0 * theta) for theta in thetas)
    unique: list[float] = []
    for alpha in angles:
        if not unique or alpha - unique[-1] > tol:
            unique.append(alpha)
    return [a for a in unique if alpha_min < a < math.pi]


def obtuse_preimage(s: float) -> float:
    """The unique obtuse angle with |c| = s, for s in (0, 1)."""
    if not 0.0 < s < 1.0:
        raise PolygonDataError(f"no obtuse angle has |c| = {s}")
    return math.pi ** 2 / (2.0 * math.acos(-s))


def paired_branch(x: float) -> float:
    """
    The other angle (in units of pi) sharing c with x*pi across pi/2:
    pi^2/(2 x pi) + pi^2/(2 y pi) = 2 pi gives y = x/(4x - 1).
    """
    if abs(4.0 * x - 1.0) < 1e-15:
        raise PolygonDataError("x = 1/4 has no paired branch")
    return x / (4.0 * x - 1.0)


def odd_sum_after_swap(x: float) -> float:
    """
    Sum of the two odd angles of a quadrilateral obtained by swapping one of two
    equal obtuse angles to its acute |c|-partner, when the original odd angles
    sum to x*pi.
    """
    return math.pi * (2.0 - x * x) / (3.0 - 2.0 * x)


def rational_angle_transfer(q: Fraction, k: int) -> list[Fraction]:
    """
    Rational angles q' (in units of pi) with |c(q' pi)| = |c(q pi)| on the k-th branch:
    q' = q/(2kq + 1) and q/(2kq - 1), keeping values inside (0, 1).
    """
    q = Fraction(q)
    if not 0 < q < 1:
        raise PolygonDataError(f"q = {q} is outside (0, 1)")
    if k == 0:
        return [q]
    values = []
    for sign in (1, -1):
        denominator = 2 * k * q + sign
        if denominator == 0:
            continue
        value = q / denominator
        if 0 < value < 1 and value not in values:
            values.append(value)
    return sorted(values)


def as_rational_pi(alpha: float, max_denominator: int = 10_000, tol: float = 1e-10) -> Fraction | None:
    """alpha/pi as a fraction when it is one within ``tol``; None otherwise."""
    q = Fraction(alpha / math.pi).limit_denominator(max_denominator)
    if abs(float(q) * math.pi - alpha) > tol:
        return None
    return q
