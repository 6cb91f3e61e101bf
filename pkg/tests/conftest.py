import numpy as np
import pytest

from synindep.linsys import TransferModel


def stable_lag_poly(gen: np.random.Generator, degree: int, radius: float = 0.85) -> np.ndarray:
    """Monic lag polynomial whose companion spectral radius is below ``radius``.

    Built as a product of real factors ``(1 - r q^-1)`` and conjugate
    pairs, so stability holds by construction rather than by filtering
    rejected draws.
    """
    roots: list[complex] = []
    k = degree
    while k > 0:
        if k >= 2 and gen.random() < 0.5:
            rho = radius * np.sqrt(gen.random())
            ang = gen.uniform(0.0, np.pi)
            roots += [rho * np.exp(1j * ang), rho * np.exp(-1j * ang)]
            k -= 2
        else:
            roots.append(gen.uniform(-radius, radius))
            k -= 1
    if not roots:
        return np.array([1.0])
    return np.poly(np.asarray(roots)).real


def random_armax_model(gen: np.random.Generator) -> TransferModel:
    """Random ARMAX-type model, stable and invertible by construction."""
    b = gen.uniform(-1.0, 1.0, size=gen.integers(1, 4))
    f = stable_lag_poly(gen, int(gen.integers(0, 4)))
    c = stable_lag_poly(gen, int(gen.integers(0, 3)))
    d = stable_lag_poly(gen, int(gen.integers(0, 3)))
    return TransferModel(b=b, f=f, c=c, d=d)


@pytest.fixture
def make_armax():
    return random_armax_model
