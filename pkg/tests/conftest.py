import pytest
from hypothesis import HealthCheck, settings

from src.structmat import generate_random, make

settings.register_profile(
    "default",
    settings(suppress_health_check=[HealthCheck.too_slow], max_examples=50, deadline=None),
)
settings.load_profile("default")


def toeplitz(n: int, lower: float = -1.0, diag: float = 2.0, upper: float = -1.0):
    """Tridiagonal Toeplitz matrix as a banded StructuredMatrix."""
    data = [lower] * (n - 1) + [diag] * n + [upper] * (n - 1)
    return make("banded", n, 1, 1, 1, data)


def dominant(kind: str, n: int, m: int = 1, s=None, r=None, seed: int = 0, **kwargs):
    return generate_random(kind, n, m, s, r, seed=seed, diag_dominance=2.0, **kwargs)


@pytest.fixture
def tridiag9():
    return toeplitz(9)


@pytest.fixture
def babd24():
    return dominant("babd", 24, 2, seed=3)

