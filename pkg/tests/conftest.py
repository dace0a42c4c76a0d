import numpy as np
import pytest

from largesol import PhiSpec


@pytest.fixture(scope="module")
def anyio_backend():
    return ("asyncio", {"debug": True})


@pytest.fixture
def unit_phi():
    """
    φ ≡ 1, so h is the identity and the operator is the plain Laplacian.
    """
    return PhiSpec.custom(
        phi=lambda t: np.ones_like(t),
        Phi=lambda t: 0.5 * t * t,
        Phi_inv=lambda y: np.sqrt(2.0 * y),
        h_inv=lambda s: s,
        indices=(2.0, 2.0, 1.0, 1.0),
        name="laplacian",
    )
