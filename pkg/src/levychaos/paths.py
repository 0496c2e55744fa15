"""Path substrates: Monte Carlo grids and exact finite-jump paths.

Grid paths carry per-step increments dX of the simulated process; Gamma
increments are sampled exactly from their known law (Gamma(a*dt, rate b)), so
the only discretization error left is the power-jump approximation
(dX)^i ~ sum of jump^i within a step, which vanishes as dt -> 0.

Jump paths are synthetic: finitely many jumps plus linear drift, with a
freely declared compensator vector.  On such a path every iterated integral
is computable in closed form, which turns the representation identity into an
exact algebraic test.

Randomness is counter-based: each path derives its stream from numpy's Philox
generator keyed by (seed, path_index), so batches are reproducible regardless
of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MomentError, PathError
from .models import (
    CompoundPoisson,
    Deterministic,
    ExponentialSigned,
    GammaJumps,
    LevyModel,
    MomentVector,
    SyntheticMoments,
    TwoPoint,
    jump_mean_rate,
)


def rng_for(seed: int, path_index: int = 0) -> np.random.Generator:
    """Independent, reproducible stream for one path of a batch."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path_index,))))


# --------------------------------------------------------------------------
# grid paths
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridPath:
    t0: float
    dt: float
    steps: int
    dX: np.ndarray
    seed: int
    path_index: int
    model: LevyModel

    @property
    def horizon(self) -> float:
        return self.steps * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def cumulative(self) -> np.ndarray:
        out = np.empty(self.steps + 1)
        out[0] = 0.0
        np.cumsum(self.dX, out=out[1:])
        return out


def grid_index(t: float, dt: float, label: str = "t0") -> int:
    idx = round(t / dt)
    if abs(idx * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise PathError(f"misaligned {label}: {t} is not a grid multiple of dt={dt}")
    return idx


def _jump_sizes(law, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(law, TwoPoint):
        vals = np.array([float(law.x_minus), float(law.x_plus)])
        probs = np.array([float(law.p_minus), float(law.p_plus)])
        return rng.choice(vals, size=count, p=probs)
    if isinstance(law, Deterministic):
        return np.full(count, float(law.value))
    if isinstance(law, ExponentialSigned):
        mag = rng.exponential(1.0 / float(law.rate), size=count)
        signs = np.where(rng.random(count) < float(law.sign_prob), 1.0, -1.0)
        return mag * signs
    raise PathError(f"cannot sample jump law {law!r}")


def simulate_grid(
    model: LevyModel,
    T: float,
    dt: float,
    t0: float = 0.0,
    seed: int = 0,
    path_index: int = 0,
) -> GridPath:
    """Per-step increments of X over [0, T]; deterministic given (seed, path_index)."""
    if dt <= 0:
        raise PathError("nonpositive dt")
    if T < dt:
        raise PathError(f"horizon {T} shorter than one step {dt}")
    steps = grid_index(T, dt, "horizon")
    idx0 = grid_index(t0, dt, "t0")
    if not 0 <= idx0 < steps:
        raise PathError(f"t0={t0} outside the grid [0, {T})")
    if isinstance(model.jump_part, SyntheticMoments):
        raise PathError("cannot simulate a synthetic-moment model")

    rng = rng_for(seed, path_index)
    dX = np.zeros(steps)
    if isinstance(model.jump_part, GammaJumps):
        a, b = float(model.jump_part.a), float(model.jump_part.b)
        dX += rng.gamma(a * dt, 1.0 / b, size=steps)
    elif isinstance(model.jump_part, CompoundPoisson):
        lam = float(model.jump_part.intensity)
        counts = rng.poisson(lam * dt, size=steps)
        total = int(counts.sum())
        if total:
            sizes = _jump_sizes(model.jump_part.law, total, rng)
            dX += np.bincount(np.repeat(np.arange(steps), counts), weights=sizes, minlength=steps)
    if model.sigma2 > 0:
        dX += rng.normal(0.0, math.sqrt(float(model.sigma2) * dt), size=steps)
    extra_drift = float(model.mean_rate) - float(jump_mean_rate(model.jump_part))
    if extra_drift != 0.0:
        dX += extra_drift * dt
    return GridPath(float(t0), float(dt), steps, dX, seed, path_index, model)


def power_increments(path: GridPath, i: int, mv_adjusted: MomentVector) -> np.ndarray:
    """Per-step increments of the i-th compensated power process on the grid.

    (dX)^2 absorbs the Brownian quadratic variation, which is exactly why the
    sigma-adjusted compensator is the one to subtract.
    """
    if not mv_adjusted.adjusted:
        raise MomentError("unadjusted moments rejected: sigma-adjust first")
    if i < 1:
        raise MomentError("power index must be >= 1")
    return path.dX**i - float(mv_adjusted.moment(i)) * path.dt


def sample_terminal_increments(
    model: LevyModel, t: float, n_samples: int, seed: int
) -> np.ndarray:
    """Draw X_{t0+t} - X_{t0} directly from the increment law (no grid)."""
    if t <= 0:
        raise PathError("t must be > 0")
    if isinstance(model.jump_part, SyntheticMoments):
        raise PathError("cannot simulate a synthetic-moment model")
    rng = rng_for(seed, 0)
    out = np.zeros(n_samples)
    if isinstance(model.jump_part, GammaJumps):
        a, b = float(model.jump_part.a), float(model.jump_part.b)
        out += rng.gamma(a * t, 1.0 / b, size=n_samples)
    elif isinstance(model.jump_part, CompoundPoisson):
        lam = float(model.jump_part.intensity)
        counts = rng.poisson(lam * t, size=n_samples)
        total = int(counts.sum())
        if total:
            sizes = _jump_sizes(model.jump_part.law, total, rng)
            out += np.bincount(np.repeat(np.arange(n_samples), counts), weights=sizes, minlength=n_samples)
    if model.sigma2 > 0:
        out += rng.normal(0.0, math.sqrt(float(model.sigma2) * t), size=n_samples)
    extra = float(model.mean_rate) - float(jump_mean_rate(model.jump_part))
    if extra != 0.0:
        out += extra * t
    return out


# --------------------------------------------------------------------------
# exact jump paths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpPath:
    """Finitely many jumps plus drift, with declared compensator values.

    The declared moment vector is a free choice: the representation identity
    holds pathwise for any compensator constants as long as the compensated
    processes are built from the same values.
    """

    horizon: object
    drift_rate: object
    jumps: tuple  # ((time, size), ...) strictly increasing times in (0, horizon]
    mv: MomentVector

    def __post_init__(self):
        last = 0
        for s, x in self.jumps:
            if s <= last:
                raise PathError("jump times must be strictly increasing (duplicates rejected)")
            if s > self.horizon:
                raise PathError(f"jump at {s} beyond horizon {self.horizon}")
            if x == 0:
                raise PathError("jump sizes must be nonzero")
            last = s

    def value(self, u):
        """X_u = drift*u + sum of jumps at times <= u."""
        acc = self.drift_rate * u
        for s, x in self.jumps:
            if s <= u:
                acc = acc + x
        return acc

    def to_float(self) -> "JumpPath":
        return JumpPath(
            float(self.horizon),
            float(self.drift_rate),
            tuple((float(s), float(x)) for s, x in self.jumps),
            self.mv.as_float(),
        )


def make_jump_path(
    horizon,
    drift_rate,
    jumps: Sequence[tuple],
    moments_decl: Sequence,
    sigma2=0,
) -> JumpPath:
    """Assemble a JumpPath; ``moments_decl`` are the compensator values m1.. ."""
    mv = MomentVector(tuple(moments_decl), sigma2, adjusted=True)
    return JumpPath(horizon, drift_rate, tuple((s, x) for s, x in jumps), mv)


def _default_size(rng: np.random.Generator) -> float:
    x = 0.0
    while x == 0.0:
        x = rng.uniform(-1.0, 1.0)
    return x


def random_jump_path(
    count: int,
    horizon,
    seed: int,
    *,
    size_law: Optional[Callable[[np.random.Generator], object]] = None,
    drift_rate=0,
    moments_decl: Optional[Sequence] = None,
    moment_order: int = 6,
    rational: bool = False,
) -> JumpPath:
    """Random fixture path: ``count`` jumps at distinct times in (0, horizon].

    With ``rational`` True, times, sizes, drift and compensators are drawn as
    small Fractions so downstream evaluation is exact.
    """
    if count < 0:
        raise PathError("jump count must be >= 0")
    rng = rng_for(seed, 0)
    if rational:
        horizon = Fraction(horizon)
        grid = 1024
        ticks = sorted(rng.choice(np.arange(1, grid + 1), size=count, replace=False)) if count else []
        times = [horizon * Fraction(int(k), grid) for k in ticks]
        sizes = []
        for _ in range(count):
            num = 0
            while num == 0:
                num = int(rng.integers(-20, 21))
            sizes.append(Fraction(num, int(rng.integers(1, 11))))
        if moments_decl is None:
            moments_decl = tuple(
                Fraction(int(rng.integers(-10, 11)), int(rng.integers(1, 9)))
                for _ in range(moment_order)
            )
        if drift_rate == "random":
            drift_rate = Fraction(int(rng.integers(-8, 9)), int(rng.integers(1, 9)))
    else:
        horizon = float(horizon)
        times = sorted(float(horizon) * rng.uniform(0.0, 1.0) for _ in range(count))
        while len(set(times)) < count:  # vanishing probability, but be safe
            times = sorted(float(horizon) * rng.uniform(0.0, 1.0) for _ in range(count))
        draw = size_law if size_law is not None else _default_size
        sizes = [draw(rng) for _ in range(count)]
        if moments_decl is None:
            moments_decl = tuple(0 for _ in range(moment_order))
        if drift_rate == "random":
            drift_rate = rng.uniform(-1.0, 1.0)
    return make_jump_path(horizon, drift_rate, list(zip(times, sizes)), moments_decl)


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def grid_csv_rows(path: GridPath) -> list[list[str]]:
    rows = [["step", "t", "dX", "X"]]
    x = 0.0
    for l in range(path.steps):
        x += float(path.dX[l])
        rows.append([str(l + 1), repr((l + 1) * path.dt), repr(float(path.dX[l])), repr(x)])
    return rows


def jump_path_to_json(path: JumpPath) -> dict:
    from .chaos import scalar_to_json

    return {
        "horizon": scalar_to_json(path.horizon),
        "drift": scalar_to_json(path.drift_rate),
        "jumps": [{"t": scalar_to_json(s), "x": scalar_to_json(x)} for s, x in path.jumps],
        "moments": [scalar_to_json(m) for m in path.mv.m],
    }
