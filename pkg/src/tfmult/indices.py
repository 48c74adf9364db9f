"""Exponent arithmetic on the index square ``(1/p, 1/q) in [0, 1]^2``.

All comparisons use :class:`fractions.Fraction`, so points on region boundaries
are classified exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from tfmult.gabor import INF, Inf

REGIONS = ("I1", "I1*", "I2", "I2*", "I3", "I3*")
LARGE = "large_lambda"
SMALL = "small_lambda"
HALF = Fraction(1, 2)


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v).limit_denominator(10**12)


def inverse_exponent(p) -> Fraction:
    """``1/p`` as a fraction; ``INF`` and ``"inf"`` give 0."""
    if p is INF or (isinstance(p, str) and p.strip().lower() == "inf"):
        return Fraction(0)
    p = as_fraction(p)
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    return 1 / p


@dataclass(frozen=True)
class IndexPoint:
    inv_p: Fraction
    inv_q: Fraction

    def __post_init__(self) -> None:
        ip, iq = as_fraction(self.inv_p), as_fraction(self.inv_q)
        if not (0 <= ip <= 1 and 0 <= iq <= 1):
            raise ValueError(f"({ip}, {iq}) lies outside the unit square")
        object.__setattr__(self, "inv_p", ip)
        object.__setattr__(self, "inv_q", iq)

    @classmethod
    def from_exponents(cls, p, q) -> IndexPoint:
        return cls(inverse_exponent(p), inverse_exponent(q))

    @property
    def inv_p_dual(self) -> Fraction:
        return 1 - self.inv_p

    def exponents(self) -> tuple[Fraction | Inf, Fraction | Inf]:
        ip, iq = self.inv_p, self.inv_q
        return (INF if ip == 0 else 1 / ip, INF if iq == 0 else 1 / iq)


@dataclass(frozen=True)
class SpaceTriple:
    inv_p: Fraction
    inv_q: Fraction
    delta: Fraction | float = Fraction(0)

    def __post_init__(self) -> None:
        pt = IndexPoint(self.inv_p, self.inv_q)
        object.__setattr__(self, "inv_p", pt.inv_p)
        object.__setattr__(self, "inv_q", pt.inv_q)
        d = self.delta
        if not isinstance(d, (Fraction, int)):
            d = float(d)
            if d != d or d in (float("inf"), float("-inf")):
                raise ValueError("delta must be finite")
        else:
            d = Fraction(d)
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_exponents(cls, p, q, delta=0) -> SpaceTriple:
        return cls(inverse_exponent(p), inverse_exponent(q), delta)

    @property
    def point(self) -> IndexPoint:
        return IndexPoint(self.inv_p, self.inv_q)


def classify_index_point(pt: IndexPoint) -> frozenset[str]:
    """Every region whose (non-strict) defining inequality holds at ``pt``."""
    ip, iq, ipd = pt.inv_p, pt.inv_q, pt.inv_p_dual
    out = set()
    if max(ip, ipd) <= iq:
        out.add("I1")
    if min(ip, ipd) >= iq:
        out.add("I1*")
    if max(iq, HALF) <= ipd:
        out.add("I2")
    if min(iq, HALF) >= ipd:
        out.add("I2*")
    if max(iq, HALF) <= ip:
        out.add("I3")
    if min(iq, HALF) >= ip:
        out.add("I3*")
    return frozenset(out)


def _branch(region: str, pt: IndexPoint) -> Fraction:
    base = region.rstrip("*")
    if base == "I1":
        return -pt.inv_p
    if base == "I2":
        return pt.inv_q - 1
    return -2 * pt.inv_p + pt.inv_q


def dilation_exponent(pt: IndexPoint, regime: str) -> Fraction:
    """``mu1`` (``large_lambda``, starred regions) or ``mu2`` (``small_lambda``, unstarred).

    All applicable branches are evaluated and must coincide.
    """
    if regime not in (LARGE, SMALL):
        raise ValueError(f"regime must be {LARGE!r} or {SMALL!r}")
    starred = regime == LARGE
    regions = [r for r in classify_index_point(pt) if r.endswith("*") == starred]
    if not regions:
        raise RuntimeError(f"no region contains {pt}")
    values = {_branch(r, pt) for r in regions}
    if len(values) != 1:
        raise RuntimeError(f"inconsistent branches at {pt}: {sorted(values)}")
    return values.pop()


def mu1(p, q) -> Fraction:
    return dilation_exponent(IndexPoint.from_exponents(p, q), LARGE)


def mu2(p, q) -> Fraction:
    return dilation_exponent(IndexPoint.from_exponents(p, q), SMALL)


def loss_threshold(inv_p, alpha, d: int):
    """``d (alpha - 2) |1/p - 1/2|``; exact when ``alpha`` is rational."""
    if isinstance(alpha, float):
        if alpha < 2:
            raise ValueError("alpha must be >= 2")
        return d * (alpha - 2) * abs(float(as_fraction(inv_p)) - 0.5)
    a = as_fraction(alpha)
    if a < 2:
        raise ValueError("alpha must be >= 2")
    return d * (a - 2) * abs(as_fraction(inv_p) - HALF)


def interpolate_exponents(a: SpaceTriple, b: SpaceTriple, theta) -> SpaceTriple:
    """Affine combination ``(1 - theta) a + theta b`` in ``(1/p, 1/q, delta)``."""
    th = as_fraction(theta) if not isinstance(theta, float) or theta == theta else theta
    if not 0 < th < 1:
        raise ValueError("theta must lie in (0, 1)")
    mix = lambda u, v: (1 - th) * u + th * v
    if isinstance(a.delta, float) or isinstance(b.delta, float):
        delta = (1 - float(th)) * float(a.delta) + float(th) * float(b.delta)
    else:
        delta = mix(a.delta, b.delta)
    return SpaceTriple(mix(a.inv_p, b.inv_p), mix(a.inv_q, b.inv_q), delta)


def unit_square_points(m: int = 100) -> Iterable[IndexPoint]:
    """Rational points ``(i/m, k/m)``."""
    for i in range(m + 1):
        for k in range(m + 1):
            yield IndexPoint(Fraction(i, m), Fraction(k, m))
