"""Polynomials in elapsed time with generic scalar coefficients.

A :class:`TimePolynomial` stores coefficients ``(q0, q1, ..., qd)`` for
``q0 + q1*t + ... + qd*t^d``.  Coefficients may be exact (``int`` /
``fractions.Fraction``) or ``float``; arithmetic never converts between the
two worlds implicitly — use :meth:`TimePolynomial.to_float` explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


def _trim(coeffs: tuple) -> tuple:
    n = len(coeffs)
    while n > 0 and coeffs[n - 1] == 0:
        n -= 1
    return coeffs[:n]


@dataclass(frozen=True)
class TimePolynomial:
    """Immutable polynomial in one variable (elapsed time)."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence = ()):
        object.__setattr__(self, "coeffs", _trim(tuple(coeffs)))

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero() -> "TimePolynomial":
        return TimePolynomial(())

    @staticmethod
    def constant(c) -> "TimePolynomial":
        return TimePolynomial((c,))

    @staticmethod
    def monomial(power: int, c=1) -> "TimePolynomial":
        return TimePolynomial((0,) * power + (c,))

    # -- queries -------------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial reported as -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, power: int):
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return 0

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other: "TimePolynomial") -> "TimePolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return TimePolynomial(out)

    def __neg__(self) -> "TimePolynomial":
        return TimePolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "TimePolynomial") -> "TimePolynomial":
        return self + (-other)

    def __mul__(self, other: "TimePolynomial") -> "TimePolynomial":
        if self.is_zero() or other.is_zero():
            return TimePolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return TimePolynomial(out)

    def scale(self, s) -> "TimePolynomial":
        return TimePolynomial(tuple(s * c for c in self.coeffs))

    def antiderivative(self) -> "TimePolynomial":
        """Antiderivative with zero constant term.

        Exact coefficients stay exact: integer division by (i+1) goes
        through Fraction.
        """
        out = [0]
        for i, c in enumerate(self.coeffs):
            if isinstance(c, float):
                out.append(c / (i + 1))
            else:
                out.append(Fraction(c, 1) / (i + 1))
        return TimePolynomial(out)

    # -- conversions ----------------------------------------------------
    def to_float(self) -> "TimePolynomial":
        return TimePolynomial(tuple(float(c) for c in self.coeffs))

    def padded(self, length: int) -> tuple:
        """Coefficients padded with zeros up to ``length`` entries."""
        return self.coeffs + (0,) * (length - len(self.coeffs))
