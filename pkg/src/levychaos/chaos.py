"""Coefficient engine for chaos expansions of powers of increments.

Builds the constant polynomials C^(k) (two independent routes: a coefficient
recursion and a partition sum), the integral coefficients Pi, full expansions
in the compensated-power-jump (Y) basis, the non-compensated basis with purely
multinomial coefficients, and Poisson-random-measure integrand descriptors.

Tuple orientation: in an expansion term keyed by (i1, ..., ij), i1 is the
order of the innermost (earliest-time) integrator.  Evaluators and
serializations all share this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import combinatorics as comb
from .errors import BasisError, OrderError
from .models import LevyModel, MomentVector, moments, sigma_adjust
from .timepoly import TimePolynomial

BASES = ("Y", "H", "NONCOMPENSATED", "PRM")


def _div(value, r: int):
    if isinstance(value, float):
        return value / r
    return Fraction(value, 1) / r


def _q_rows(k: int, mv: MomentVector) -> list[list]:
    """Coefficient rows q^(0)..q^(k); row kk holds [q0, .., q_kk] of C^(kk).

    q1^(k) = m_k and q_r^(k) = (1/r) * sum_{j=1}^{k+1-r} C(k,j) m_j q_{r-1}^(k-j).
    """
    rows: list[list] = [[1]]
    for kk in range(1, k + 1):
        row = [0] * (kk + 1)
        row[1] = mv.moment(kk)
        for r in range(2, kk + 1):
            acc = 0
            for j in range(1, kk + 2 - r):
                acc += math.comb(kk, j) * mv.moment(j) * rows[kk - j][r - 1]
            row[r] = _div(acc, r)
        rows.append(row)
    return rows


def c_poly_recursive(k: int, mv: MomentVector) -> TimePolynomial:
    """C^(k) as a polynomial in elapsed time, by the coefficient recursion."""
    if k < 0:
        raise OrderError("k must be >= 0")
    return TimePolynomial(_q_rows(k, mv)[k])


def c_poly_closed(k: int, mv: MomentVector) -> TimePolynomial:
    """C^(k) by the partition sum; must equal the recursive route exactly."""
    if k < 0:
        raise OrderError("k must be >= 0")
    if k == 0:
        return TimePolynomial((1,))
    coeffs = [0] * (k + 1)
    for part in comb.partitions(k):
        l = part.length
        num = comb.multinomial(part.parts) * comb.multinomial(part.multiplicities)
        den = math.factorial(l)
        # the combined weight counts set partitions by block sizes: an integer
        assert num % den == 0
        weight = num // den
        prod_m = 1
        for iq in part.parts:
            prod_m = prod_m * mv.moment(iq)
        coeffs[l] += weight * prod_m
    return TimePolynomial(coeffs)


def pi_coeff(
    theta: comb.IndexTuple,
    k: int,
    mv: MomentVector,
    _c_cache: Optional[dict] = None,
) -> TimePolynomial:
    """Coefficient of the iterated integral indexed by ``theta`` at order k.

    Equals multinomial(theta + (n,)) * C^(n) with n = k - sum(theta); depends
    on elapsed time only, never on the start time or integration variables.
    """
    n = k - sum(theta)
    if n < 0:
        raise OrderError(f"tuple exceeds order: sum{theta} > {k}")
    weight = comb.multinomial(tuple(theta) + (n,))
    if _c_cache is not None:
        if n not in _c_cache:
            _c_cache[n] = c_poly_recursive(n, mv)
        cp = _c_cache[n]
    else:
        cp = c_poly_recursive(n, mv)
    return cp.scale(weight)


@dataclass(frozen=True)
class Expansion:
    """Finite chaos expansion: tuple-indexed time polynomials plus a constant."""

    order: int
    basis: str
    terms: dict
    constant: TimePolynomial
    moments: MomentVector
    sigma_adjusted: bool
    ortho: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise BasisError(f"unknown basis {self.basis!r}")

    def term(self, theta: comb.IndexTuple) -> TimePolynomial:
        return self.terms.get(tuple(theta), TimePolynomial.zero())

    def to_float(self) -> "Expansion":
        return Expansion(
            self.order,
            self.basis,
            {t: p.to_float() for t, p in self.terms.items()},
            self.constant.to_float(),
            self.moments.as_float(),
            self.sigma_adjusted,
            self.ortho,
        )


def terms_equal(a: Expansion, b: Expansion) -> bool:
    """Term-for-term equality, treating absent tuples as zero polynomials."""
    keys = set(a.terms) | set(b.terms)
    return all(a.term(t) == b.term(t) for t in keys) and a.constant == b.constant


def expand_from_moments(
    n: int,
    mv: MomentVector,
    *,
    k_max: int = comb.DEFAULT_ORDER_CAP,
) -> Expansion:
    """Y-basis expansion of order n from an already sigma-adjusted vector."""
    if not mv.adjusted:
        raise BasisError("expansion requires a sigma-adjusted moment vector")
    cache: dict = {}
    terms = {}
    for theta in comb.index_set(n, k_max=k_max):
        terms[theta] = pi_coeff(theta, n, mv, cache)
    if n not in cache:
        cache[n] = c_poly_recursive(n, mv)
    return Expansion(n, "Y", terms, cache[n], mv, sigma_adjusted=True)


def expand(
    n: int,
    model: LevyModel,
    *,
    exact: bool = False,
    k_max: int = comb.DEFAULT_ORDER_CAP,
) -> Expansion:
    """Y-basis expansion of (X_{t+t0} - X_{t0})^n for the given model.

    The Brownian variance is folded into m2 exactly once here; with sigma2 = 0
    this is the pure-jump formula unchanged.
    """
    if n < 1:
        raise OrderError("expansion order must be >= 1")
    mv = sigma_adjust(moments(model, max(n, 2), exact=exact))
    return expand_from_moments(n, mv, k_max=k_max)


def expectation(n: int, model: LevyModel, *, exact: bool = False) -> TimePolynomial:
    """E[(X_{t+t0} - X_{t0})^n] as a polynomial in elapsed time.

    Every stochastic-integral term has zero mean, so this is the expansion's
    constant.
    """
    mv = sigma_adjust(moments(model, max(n, 2), exact=exact))
    return c_poly_recursive(n, mv)


def jamshidian_expand(n: int, *, k_max: int = comb.DEFAULT_ORDER_CAP) -> Expansion:
    """Non-compensated expansion of X_t^n: purely multinomial coefficients.

    Only tuples with exact sum n appear and the constant vanishes; this is
    what the Y-basis formula degenerates to when every moment is zeroed.
    """
    if n < 1:
        raise OrderError("expansion order must be >= 1")
    terms = {}
    for theta in comb.index_set(n, k_max=k_max):
        if sum(theta) == n:
            terms[theta] = TimePolynomial.constant(comb.multinomial(theta))
    zero_mv = MomentVector((0,) * max(n, 2), 0, adjusted=True)
    return Expansion(n, "NONCOMPENSATED", terms, TimePolynomial.zero(), zero_mv, sigma_adjusted=True)


@dataclass(frozen=True)
class PrmIntegrandDescriptor:
    """One Poisson-random-measure integrand: monomial exponents + coefficient.

    ``exponents[p]`` is the power applied to the jump-size variable paired
    with the (p+1)-th time variable, times ordered outermost-first; with
    ``innermost_last`` True the final exponent rides on the earliest-time
    (innermost) variable.  The coefficient is the same elapsed-time polynomial
    as the Y-basis term for ``tuple`` and involves neither the start time nor
    any integration variable.
    """

    tuple: comb.IndexTuple
    exponents: comb.IndexTuple
    coefficient: TimePolynomial
    innermost_last: bool = True

    def __post_init__(self):
        if self.exponents != self.tuple:
            raise BasisError("descriptor exponents must equal the index tuple")


def prm_integrands(
    n: int,
    model: LevyModel,
    *,
    exact: bool = False,
    k_max: int = comb.DEFAULT_ORDER_CAP,
) -> list[PrmIntegrandDescriptor]:
    """Integrand descriptors for the random-measure form of the expansion."""
    exp = expand(n, model, exact=exact, k_max=k_max)
    return [
        PrmIntegrandDescriptor(theta, theta, poly)
        for theta, poly in exp.terms.items()
    ]


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def scalar_to_json(x):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    return int(x)


def scalar_from_json(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def expansion_to_json_dict(exp: Expansion) -> dict:
    return {
        "order": exp.order,
        "basis": exp.basis,
        "sigma_adjusted": exp.sigma_adjusted,
        "moments": [scalar_to_json(x) for x in exp.moments.m],
        "sigma2": scalar_to_json(exp.moments.sigma2),
        "constant": [scalar_to_json(c) for c in exp.constant.coeffs],
        "terms": [
            {"tuple": list(t), "poly": [scalar_to_json(c) for c in p.coeffs]}
            for t, p in exp.terms.items()
        ],
    }


def expansion_from_json_dict(data: dict) -> Expansion:
    terms = {
        tuple(item["tuple"]): TimePolynomial([scalar_from_json(c) for c in item["poly"]])
        for item in data["terms"]
    }
    mv = MomentVector(
        tuple(scalar_from_json(x) for x in data["moments"]),
        scalar_from_json(data["sigma2"]),
        adjusted=data["sigma_adjusted"],
    )
    return Expansion(
        data["order"],
        data["basis"],
        terms,
        TimePolynomial([scalar_from_json(c) for c in data["constant"]]),
        mv,
        data["sigma_adjusted"],
    )


def expansion_csv_rows(exp: Expansion) -> list[list[str]]:
    """One row per term plus a final constant row: tuple, coefficients."""

    def fmt(x):
        return str(x) if isinstance(x, (Fraction, int)) else repr(x)

    rows = [["tuple", "coeffs"]]
    for t, p in exp.terms.items():
        rows.append([" ".join(map(str, t)), " ".join(fmt(c) for c in p.coeffs)])
    rows.append(["", " ".join(fmt(c) for c in exp.constant.coeffs)])
    return rows
