"""Primitive rank-one sublattices of Z^2 and the objects attached to them.

A sublattice ``Z v`` is stored through its canonical generator ``v = (p, q)``
with ``gcd(|p|, |q|) = 1`` and either ``p > 0`` or ``(p, q) == (0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True, order=False)
class PrimitiveDirection:
    """Canonical generator ``(p, q)`` of a primitive rank-one sublattice."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if (p, q) == (0, 0):
            raise ValueError("the zero vector does not generate a rank-one lattice")
        if math.gcd(p, q) != 1:
            raise ValueError(f"({p}, {q}) is not primitive")
        if not (p > 0 or (p == 0 and q == 1)):
            raise ValueError(f"({p}, {q}) is not the canonical generator; use PrimitiveDirection.of")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def of(cls, p, q) -> "PrimitiveDirection":
        """Canonical direction of the line spanned by the integer vector ``(p, q)``."""
        p, q = int(p), int(q)
        g = math.gcd(p, q)
        if g == 0:
            raise ValueError("the zero vector does not span a line")
        p, q = p // g, q // g
        if p < 0 or (p == 0 and q < 0):
            p, q = -p, -q
        return cls(p, q)

    @classmethod
    def parse(cls, text: str) -> "PrimitiveDirection":
        """Parse the ``"p/q"`` serialization (canonicalizing the sign)."""
        try:
            a, b = text.split("/")
            return cls.of(int(a), int(b))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"bad direction string {text!r}, expected 'p/q'") from exc

    def __str__(self):
        return f"{self.p}/{self.q}"

    @property
    def vector(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def perp(self) -> tuple[int, int]:
        """The lattice vector directly orthogonal to the generator, same length."""
        return (-self.q, self.p)

    @property
    def length(self) -> float:
        return math.hypot(self.p, self.q)

    @property
    def angle(self) -> float:
        """Angle of the generator in ``[0, 2*pi)``."""
        return math.atan2(self.q, self.p) % (2 * math.pi)

    @property
    def orthogonal(self) -> "PrimitiveDirection":
        """Canonical direction of the orthogonal lattice line."""
        return PrimitiveDirection.of(-self.q, self.p)

    def contains(self, k) -> np.ndarray | bool:
        """Whether the integer vector(s) ``k`` lie in ``Z v``.

        Accepts a pair or an array with trailing dimension 2.
        """
        k = np.asarray(k)
        cross = k[..., 0] * self.q - k[..., 1] * self.p
        res = cross == 0
        return bool(res) if res.ndim == 0 else res


def enumerate_primitive(max_norm: float) -> list[PrimitiveDirection]:
    """All canonical primitive directions with generator length ``<= max_norm``.

    Sorted by ``(length, p, q)``. Returns an empty list when ``max_norm < 1``.
    """
    if max_norm < 1:
        return []
    bound = int(math.floor(max_norm))
    r2 = max_norm * max_norm
    out = []
    for p in range(0, bound + 1):
        for q in range(-bound, bound + 1):
            if p == 0 and q != 1:
                continue
            if p * p + q * q > r2 + 1e-9 or math.gcd(p, q) != 1:
                continue
            out.append(PrimitiveDirection(p, q))
    out.sort(key=lambda d: (d.p * d.p + d.q * d.q, d.p, d.q))
    return out


def h_lambda(direction: PrimitiveDirection, xi) -> np.ndarray | float:
    """``<xi, v> / L`` for the canonical generator ``v`` of the lattice."""
    xi = np.asarray(xi, dtype=float)
    val = (xi[..., 0] * direction.p + xi[..., 1] * direction.q) / direction.length
    return float(val) if np.ndim(val) == 0 else val


def h_lambda_perp(direction: PrimitiveDirection, xi) -> np.ndarray | float:
    """``<xi, v_perp> / L``."""
    xi = np.asarray(xi, dtype=float)
    a, b = direction.perp
    val = (xi[..., 0] * a + xi[..., 1] * b) / direction.length
    return float(val) if np.ndim(val) == 0 else val


def project_I_lambda(b, direction: PrimitiveDirection):
    """Average ``b`` along the periodic flow transverse to the lattice.

    In Fourier terms this keeps exactly the coefficients at ``k = j v`` (``j``
    integer, including ``k = 0``). ``b`` is any object exposing ``filtered``
    (e.g. a ``TrigPotential`` or an ``Observable``).
    """
    return b.filtered(lambda k: direction.contains(k))


def rational_direction(vec, max_denominator: int = 10_000, tol: float = 1e-12):
    """Primitive direction parallel to the real vector ``vec``, or ``None``.

    ``vec`` is declared rational when its slope is reproduced to ``tol`` by a
    fraction with denominator at most ``max_denominator``.
    """
    x, y = float(vec[0]), float(vec[1])
    if x == 0.0 and y == 0.0:
        raise ValueError("zero vector has no direction")
    if abs(x) >= abs(y):
        fr = Fraction(y / x).limit_denominator(max_denominator)
        cand = (fr.denominator, fr.numerator)
    else:
        fr = Fraction(x / y).limit_denominator(max_denominator)
        cand = (fr.numerator, fr.denominator)
    d = PrimitiveDirection.of(*cand)
    unit = np.array([x, y]) / math.hypot(x, y)
    cross = unit[0] * d.q / d.length - unit[1] * d.p / d.length
    return d if abs(cross) <= tol else None
