import numpy as np
import pytest

from largesol import DomainError
from largesol.numerics import shanks


def ladder(count):
    # limit 3 with components halving and quartering along a doubling ladder
    n = np.arange(count, dtype=float)
    points = np.array([0.0, 0.5, 1.0])
    return [3.0 + points + 2.0 * 0.5**i + 0.7 * 0.25**i * (1.0 + points) for i in n]


def test_second_order_transform_removes_two_components():
    estimates = shanks(ladder(10), 2)
    assert len(estimates) == 6
    for estimate in estimates:
        np.testing.assert_allclose(estimate, [3.0, 3.5, 4.0], rtol=0, atol=1e-10)


def test_first_order_transform_leaves_the_quarter_component():
    estimates = shanks(ladder(10), 1)
    errors = [float(np.max(np.abs(e - [3.0, 3.5, 4.0]))) for e in estimates]
    assert errors[-1] > 1e-6
    assert errors[-1] / errors[-2] == pytest.approx(0.25, rel=5e-2)


def test_converged_terms_are_kept():
    terms = [np.array([1.0, 2.0 + 0.5**i]) for i in range(5)]
    estimates = shanks(terms, 2)
    assert np.all(np.isfinite(estimates[0]))
    assert estimates[0][0] == 1.0
    assert estimates[0][1] == pytest.approx(2.0, abs=1e-12)


def test_short_sequences():
    with pytest.raises(DomainError):
        shanks(ladder(4), 2)
    with pytest.raises(DomainError):
        shanks(ladder(4), 0)
