"""Smooth functionals of increments via multivariate Taylor expansion.

A functional g(x_1, ..., x_n) of the increments over a strictly increasing
time grid is truncated to total degree D and evaluated pathwise: each
monomial factor (increment_k)^e is rebuilt from the chaos expansion of that
power on its own interval, and the interval products multiply scalar-wise
(non-overlapping windows).  Cross-interval products are NOT flattened into a
single expansion; pathwise evaluation tests the same identity without
symbolic product machinery.

The derivative oracle supplies normalized derivatives (1/l!) d^l g(0); the
Taylor coefficient of a monomial with exponent vector e is then
multinomial(e) times the oracle value.  Extraction of single-integral
predictable representations is out of scope.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import combinatorics as comb
from .chaos import expand, expand_from_moments
from .errors import FunctionalError
from .evaluate import reconstruct
from .models import LevyModel
from .paths import JumpPath, grid_index


@dataclass(frozen=True)
class FunctionalSpec:
    """Functional of increments over (t_{k-1}, t_k] windows, t_0 = 0.

    ``norm_deriv(e)`` returns (1/l!) * d^l g / dx^e at 0 for the exponent
    vector e (l = sum e); ``value(xs)`` evaluates g directly.  ``growth_ok``
    records the user's assertion that the Taylor coefficients satisfy the
    summability bound; it is recorded, not proven.
    """

    arity: int
    grid: tuple
    order: int
    norm_deriv: Callable[[tuple], object]
    value: Callable[[Sequence], object]
    label: str = "custom"
    growth_ok: bool = True

    def __post_init__(self):
        if self.arity < 1 or len(self.grid) != self.arity:
            raise FunctionalError("grid length must equal the functional arity")
        prev = 0
        for tk in self.grid:
            if tk <= prev:
                raise FunctionalError("overlapping intervals rejected: grid must be strictly increasing and positive")
            prev = tk
        if self.order < 0:
            raise FunctionalError("truncation order must be >= 0")


def taylor_terms(spec: FunctionalSpec) -> list[tuple[tuple, object]]:
    """(exponent vector, coefficient) for every monomial with sum(e) <= D.

    Zero coefficients are dropped; ordering is by total degree, then
    lexicographic.
    """
    terms = []
    for total in range(spec.order + 1):
        for e in itertools.product(range(total + 1), repeat=spec.arity):
            if sum(e) != total:
                continue
            c = comb.multinomial(e) * spec.norm_deriv(e)
            if c != 0:
                terms.append((e, c))
    return terms


# --------------------------------------------------------------------------
# built-in functionals
# --------------------------------------------------------------------------


def exp_functional(grid: Sequence, order: int, scale=1.0, weights: Optional[Sequence] = None) -> FunctionalSpec:
    """g(x) = scale * exp(sum_k w_k x_k)."""
    grid = tuple(grid)
    n = len(grid)
    w = tuple(weights) if weights is not None else (1.0,) * n

    def norm_deriv(e):
        l = sum(e)
        acc = scale
        for wk, ek in zip(w, e):
            acc = acc * wk**ek
        return acc / math.factorial(l)

    def value(xs):
        return scale * math.exp(sum(wk * float(x) for wk, x in zip(w, xs)))

    return FunctionalSpec(n, grid, order, norm_deriv, value, label="exp")


def poly_functional(grid: Sequence, order: int, terms: dict) -> FunctionalSpec:
    """g(x) = sum_e terms[e] * prod_k x_k^e_k, exact for D >= total degree."""
    grid = tuple(grid)
    n = len(grid)
    coeffs = {tuple(e): c for e, c in terms.items()}
    for e in coeffs:
        if len(e) != n:
            raise FunctionalError(f"exponent vector {e} does not match arity {n}")

    def norm_deriv(e):
        c = coeffs.get(tuple(e), 0)
        if c == 0 or not any(e):
            return c
        # invert: monomial coefficient = multinomial(e) * norm_deriv(e);
        # keep the factor exact so rational inputs stay rational
        num = 1
        for ek in e:
            num *= math.factorial(ek)
        return c * Fraction(num, math.factorial(sum(e)))

    def value(xs):
        acc = 0
        for e, c in coeffs.items():
            term = c
            for x, ek in zip(xs, e):
                term = term * x**ek
            acc = acc + term
        return acc

    return FunctionalSpec(n, grid, order, norm_deriv, value, label="poly")


def forward_contract(grid: Sequence, order: int, s0: float, rate: float, maturity: float) -> FunctionalSpec:
    """Forward price on a no-income security under an exponential model.

    F = S0 * exp(X_t) * exp(rate * (maturity - t)) with t the last grid time.
    """
    grid = tuple(grid)
    if maturity < grid[-1]:
        raise FunctionalError("maturity before valuation time")
    scale = s0 * math.exp(rate * (maturity - grid[-1]))
    spec = exp_functional(grid, order, scale=scale)
    return FunctionalSpec(spec.arity, grid, order, spec.norm_deriv, spec.value, label="forward")


def functional_from_json(data: dict) -> FunctionalSpec:
    kind = data.get("kind")
    grid = data.get("grid")
    order = data.get("order")
    if kind == "exp":
        return exp_functional(grid, order, scale=data.get("scale", 1.0), weights=data.get("weights"))
    if kind == "poly":
        terms = {tuple(item["exponents"]): item["coeff"] for item in data["terms"]}
        return poly_functional(grid, order, terms)
    if kind == "forward":
        return forward_contract(grid, order, data["s0"], data["rate"], data["maturity"])
    raise FunctionalError(f"unknown functional kind {kind!r}")


# --------------------------------------------------------------------------
# pathwise evaluation
# --------------------------------------------------------------------------


@dataclass(eq=False)
class FunctionalReport:
    label: str
    order: int
    approximations: list
    directs: list

    @property
    def abs_errors(self) -> list:
        return [abs(a - d) for a, d in zip(self.approximations, self.directs)]

    @property
    def mean_abs_error(self) -> float:
        errs = self.abs_errors
        return float(sum(float(e) for e in errs) / len(errs)) if errs else 0.0

    @property
    def max_abs_error(self) -> float:
        return max((float(e) for e in self.abs_errors), default=0.0)


def _interval_powers(spec: FunctionalSpec, path, model: Optional[LevyModel], k_max: int) -> list[dict]:
    """recon[k][e] = reconstructed (X_{t_k} - X_{t_{k-1}})^e for e = 0..D."""
    needed = sorted({e for term, _ in taylor_terms(spec) for e in term if e >= 1})
    exps = {}
    for e in needed:
        if isinstance(path, JumpPath):
            exps[e] = expand_from_moments(e, path.mv, k_max=k_max)
        else:
            exps[e] = expand(e, model if model is not None else path.model, k_max=k_max)
    out = []
    bounds = (0,) + spec.grid
    for k in range(spec.arity):
        t_lo, t_hi = bounds[k], bounds[k + 1]
        per = {0: 1}
        for e in needed:
            if isinstance(path, JumpPath):
                per[e] = reconstruct(exps[e], path, t_lo, t_hi)
            else:
                series = reconstruct(exps[e], path, float(t_lo))
                idx = grid_index(float(t_hi) - float(t_lo), path.dt, "interval end")
                per[e] = float(series.values[idx])
        out.append(per)
    return out


def _increments(spec: FunctionalSpec, path) -> list:
    bounds = (0,) + spec.grid
    out = []
    for k in range(spec.arity):
        if isinstance(path, JumpPath):
            out.append(path.value(bounds[k + 1]) - path.value(bounds[k]))
        else:
            cum = path.cumulative()
            i_lo = grid_index(float(bounds[k]), path.dt, "grid time")
            i_hi = grid_index(float(bounds[k + 1]), path.dt, "grid time")
            out.append(float(cum[i_hi] - cum[i_lo]))
    return out


def model_jump_fixtures(
    model: LevyModel,
    horizon: float,
    count: int,
    seed: int,
    *,
    mean_jumps: int = 6,
    moment_order: int = comb.DEFAULT_ORDER_CAP,
) -> list[JumpPath]:
    """Finite-jump stand-ins for a model, for exact-substrate studies.

    Each fixture carries a random number of jumps whose sizes follow the
    model's jump flavor (Gamma-distributed for Gamma jump parts), the model's
    residual drift, and the model's sigma-adjusted moments as declared
    compensators.  Truncation studies on these fixtures see no discretization
    error at all.
    """
    from .models import CompoundPoisson, GammaJumps, jump_mean_rate, moments, sigma_adjust
    from .paths import _jump_sizes, make_jump_path, rng_for

    mv = sigma_adjust(moments(model, max(moment_order, 2)))
    drift = float(model.mean_rate) - float(jump_mean_rate(model.jump_part))
    fixtures = []
    for i in range(count):
        rng = rng_for(seed, i)
        nj = 1 + int(rng.poisson(mean_jumps))
        times = np.sort(rng.uniform(0.0, float(horizon), size=nj))
        while len(np.unique(times)) < nj or times[0] <= 0.0:
            times = np.sort(rng.uniform(0.0, float(horizon), size=nj))
        part = model.jump_part
        if isinstance(part, GammaJumps):
            sizes = rng.gamma(float(part.a) * float(horizon) / nj, 1.0 / float(part.b), size=nj)
        elif isinstance(part, CompoundPoisson):
            sizes = _jump_sizes(part.law, nj, rng)
        else:
            sizes = rng.uniform(0.05, 0.5, size=nj)
        while np.any(sizes == 0.0):  # vanishingly unlikely, but jump sizes must be nonzero
            sizes = np.where(sizes == 0.0, rng.uniform(0.05, 0.5, size=nj), sizes)
        fixtures.append(
            make_jump_path(
                float(horizon),
                drift,
                list(zip(times.tolist(), sizes.tolist())),
                mv.m,
                sigma2=mv.sigma2,
            )
        )
    return fixtures


def eval_functional(
    spec: FunctionalSpec,
    paths,
    model: Optional[LevyModel] = None,
    *,
    k_max: int = comb.DEFAULT_ORDER_CAP,
) -> FunctionalReport:
    """Evaluate the truncated functional pathwise and compare with direct g.

    ``paths`` is a single path or a batch; jump paths evaluate exactly, grid
    paths need every grid time aligned to the step.
    """
    if spec.order > k_max:
        raise FunctionalError(f"order too large: D={spec.order} > cap {k_max}")
    batch = paths if isinstance(paths, (list, tuple)) else [paths]
    if not batch:
        raise FunctionalError("empty path batch")
    terms = taylor_terms(spec)
    approxs, directs = [], []
    for path in batch:
        powers = _interval_powers(spec, path, model, k_max)
        acc = 0
        for e, c in terms:
            term = c
            for k, ek in enumerate(e):
                term = term * powers[k][ek]
            acc = acc + term
        approxs.append(acc)
        directs.append(spec.value(_increments(spec, path)))
    return FunctionalReport(spec.label, spec.order, approxs, directs)
