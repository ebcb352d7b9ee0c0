import math

import numpy as np
import pytest

from ellipse_contact import (
    EllipseShape,
    PairConfiguration,
    SymMat2,
    UnitVec2,
)


def mat_as_array(m: SymMat2) -> np.ndarray:
    return np.array([[m.m11, m.m12], [m.m12, m.m22]])


def random_pair(rng: np.random.Generator, max_aspect: float = 10.0) -> PairConfiguration:
    """Uniform, non-adversarial random configuration."""
    def shape():
        scale = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
        aspect = math.exp(rng.uniform(0.0, math.log(max_aspect)))
        return EllipseShape(scale * aspect, scale)

    th = rng.uniform(0.0, 2.0 * math.pi, 3)
    return PairConfiguration(
        shape(), shape(),
        UnitVec2.from_angle(th[0]), UnitVec2.from_angle(th[1]),
        UnitVec2.from_angle(th[2]),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
