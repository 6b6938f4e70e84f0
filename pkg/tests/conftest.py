import numpy as np
import pytest

import polykernel as pk


@pytest.fixture(scope="session")
def spaces():
    """Session cache of built spaces keyed by (weight, q, n, m)."""
    cache = {}

    def get(weight_text: str, q: int, n: int, m: float) -> pk.KernelEvaluator:
        key = (weight_text, q, n, float(m))
        if key not in cache:
            cache[key] = pk.build_space(
                pk.parse_weight(weight_text), pk.SpaceSpec(q, n, float(m))
            )
        return cache[key]

    return get


def disk_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    """Uniform draws from the disk of the given radius."""
    r = radius * np.sqrt(rng.uniform(size=count))
    return r * np.exp(2j * np.pi * rng.uniform(size=count))
