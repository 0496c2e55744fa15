"""Shared fixtures and oracle helpers."""

from fractions import Fraction

import numpy as np
import pytest

from levychaos.models import GammaJumps, LevyModel, MomentVector, parse_model


@pytest.fixture
def gamma_model() -> LevyModel:
    return LevyModel.build(jump_part=GammaJumps(10, 20))


@pytest.fixture
def mixed_model() -> LevyModel:
    return parse_model("brownian:sigma=0.01+gamma:a=10,b=20")


def random_rational_mv(rng: np.random.Generator, order: int, *, adjusted: bool = True) -> MomentVector:
    m = tuple(Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 9))) for _ in range(order))
    return MomentVector(m, Fraction(0), adjusted=adjusted)
