import numpy as np
import pytest

from specflow.charmatrix import is_hyperbolic
from specflow.kernels import exponential_kernel
from specflow.symbols import ShiftTerm, Symbol


def random_scalar_symbol(rng, eta=1.5, want_hyperbolic=True, max_tries=60):
    """Random scalar symbol with an exponential kernel, optionally hyperbolic."""
    for _ in range(max_tries):
        a = rng.uniform(1.8, 3.5)
        mass = rng.uniform(-1.5, 1.5)
        shift = rng.uniform(-2.0, 2.0)
        sym = Symbol(1, exponential_kernel(a, [[mass]]),
                     (ShiftTerm(0.0, [[shift]]),), min(eta, 0.9 * a))
        if not want_hyperbolic or is_hyperbolic(sym).hyperbolic:
            return sym
    raise RuntimeError("no hyperbolic sample found")


def random_2x2_symbol(rng, eta=1.5, want_hyperbolic=True, max_tries=60):
    for _ in range(max_tries):
        a = rng.uniform(1.8, 3.0)
        M = rng.uniform(-0.8, 0.8, (2, 2))
        A = rng.uniform(-1.2, 1.2, (2, 2))
        sym = Symbol(2, exponential_kernel(a, M),
                     (ShiftTerm(0.0, A),), min(eta, 0.9 * a))
        if not want_hyperbolic or is_hyperbolic(sym).hyperbolic:
            return sym
    raise RuntimeError("no hyperbolic sample found")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
