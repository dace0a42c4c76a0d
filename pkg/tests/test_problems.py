import math

import numpy as np
import pytest

from largesol import (
    CalF,
    ConfigurationError,
    DomainError,
    NonlinearitySpec,
    StructuralError,
    WeightSpec,
    calF,
    calF_inv,
    envelope_lower,
    envelope_upper,
    eval_F,
    eval_G,
    weight_A,
)
from largesol.problems import (
    average_weight,
    cumulative_average,
    envelope_ratio_report,
    weight_function,
)


def wavy(t):
    return t * (1.0 + 0.5 * np.sin(t))


def test_antiderivatives():
    assert eval_F(NonlinearitySpec.power(2.0), 3.0) == pytest.approx(9.0)
    assert eval_F(NonlinearitySpec.exponential(), 1.0) == pytest.approx(math.e - 2.0)
    custom = NonlinearitySpec.custom(f=lambda t: t**2)
    values = eval_F(custom, np.array([1.0, 3.0]))
    assert values == pytest.approx([1.0 / 3.0, 9.0], rel=1e-9)


def test_G():
    nl = NonlinearitySpec.power(1.0)
    assert eval_G(nl, 1.0, 1.0) == 0.0
    assert eval_G(nl, 1.0, 3.0) == pytest.approx(4.0)
    assert eval_G(nl, 1.0, 1.0 + 1e-9) == pytest.approx(1e-9, rel=1e-6)
    with pytest.raises(DomainError):
        eval_G(nl, 2.0, 1.0)
    with pytest.raises(DomainError):
        eval_G(nl, -1.0, 1.0)


def test_nonlinearity_validation():
    with pytest.raises(DomainError):
        NonlinearitySpec.power(0.0)
    with pytest.raises(DomainError):
        NonlinearitySpec.custom(f=lambda t: t + 1.0)
    with pytest.raises(DomainError):
        NonlinearitySpec.custom(f=lambda t: t * np.exp(-t), monotone=True)


def test_envelopes():
    nl = NonlinearitySpec.custom(f=wavy)
    for t in (0.5, 3.0, 10.0, 100.0):
        low = envelope_lower(nl, t, T_max=1e3)
        high = envelope_upper(nl, t)
        assert low <= wavy(t) <= high
        assert low >= 0.5 * t * (1.0 - 1e-9)
        assert high <= 1.5 * t * (1.0 + 1e-9)
    assert envelope_lower(nl, 3.0, T_max=1e3) <= envelope_lower(nl, 10.0, T_max=1e3)
    assert envelope_upper(nl, 3.0) <= envelope_upper(nl, 10.0)


def test_monotone_envelope_is_f():
    nl = NonlinearitySpec.power(2.0)
    assert envelope_lower(nl, 2.0) == pytest.approx(4.0)
    assert envelope_upper(nl, 2.0) == pytest.approx(4.0)
    assert nl.envelope("lower") is nl


def test_envelope_spec_is_monotone():
    lower = NonlinearitySpec.custom(f=wavy).envelope("lower", T_max=1e3)
    grid = np.linspace(0.0, 1e3, 2001)
    assert lower.monotone
    values = lower.f(grid)
    assert np.all(np.diff(values) >= 0.0)
    assert np.all(values >= 0.5 * grid - 0.1)
    assert np.all(values <= 1.5 * grid + 0.1)


def test_envelope_ratio_report():
    report = envelope_ratio_report(NonlinearitySpec.power(2.0))
    assert report.lower_ratio_inf == pytest.approx(1.0)
    assert report.upper_ratio_sup == pytest.approx(1.0)
    assert report.as_dict()["status"] == "satisfied on sampled horizon"


def test_calF_inverse():
    nl = NonlinearitySpec.power(0.5)
    calf = CalF(nl, 1.0)
    assert calf.increasing
    assert calf(4.0) == pytest.approx(1.0)
    assert calf.inverse(1.0) == pytest.approx(4.0, rel=1e-10)
    assert calf.inverse(1e-7) == pytest.approx(4e-14, rel=1e-8)
    assert calf.inverse(0.0) == 0.0
    inverse = calF_inv(nl, 1.0, np.array([0.5, 2.0]))
    assert inverse == pytest.approx([1.0, 16.0], rel=1e-10)


def test_calF_decreasing():
    nl = NonlinearitySpec.power(3.0)
    t = np.array([0.5, 2.0, 30.0])
    assert calF_inv(nl, 1.0, calF(nl, 1.0, t)) == pytest.approx(t, rel=1e-10)


def test_calF_out_of_range():
    calf = CalF(NonlinearitySpec.power(0.5), 1.0)
    with pytest.raises(StructuralError) as info:
        calf.inverse(1e7)
    assert info.value.witness == 1e7
    with pytest.raises(DomainError):
        calf.inverse(-1.0)
    with pytest.raises(DomainError):
        calF(NonlinearitySpec.power(0.5), 1.0, 0.0)


def test_calF_not_monotone():
    nl = NonlinearitySpec.custom(f=wavy)
    with pytest.raises(StructuralError) as info:
        CalF(nl, 1.0)
    low, high = info.value.interval
    assert 0.0 < low < high


def test_weight_functions():
    assert weight_function("constant", value=2.0)(5.0) == 2.0
    saturating = weight_function("saturating", value=2.0, rate=1.0)
    assert saturating(0.0) == 0.0
    assert saturating(50.0) == pytest.approx(2.0)
    assert weight_function("algebraic-decay", exponent=2.0)(1.0) == pytest.approx(0.25)
    decay = weight_function("exponential-decay", rate=2.0)
    assert decay(1.0) == pytest.approx(math.exp(-2.0))
    with pytest.raises(ConfigurationError):
        weight_function("custom")
    with pytest.raises(ConfigurationError):
        weight_function("sinusoidal")


def test_weight_spec():
    one = weight_function("constant", value=1.0)
    lower = weight_function("saturating", value=1.0)
    ws = WeightSpec.bounds(lower, one)
    assert ws.osc(0.0) == pytest.approx(1.0)
    assert ws.osc(np.array([50.0])) == pytest.approx([0.0], abs=1e-12)
    assert WeightSpec.radial(one).osc(3.0) == 0.0
    with pytest.raises(DomainError):
        WeightSpec.bounds(one, lower)
    with pytest.raises(ConfigurationError):
        ws.component("middle")
    with pytest.raises(ConfigurationError):
        ws.component("ball-lower")


def test_ball_envelopes():
    ws = WeightSpec.bounds(
        lambda r: 1.0 + 0.5 * np.sin(r), lambda r: 2.0 + 0.5 * np.sin(r)
    ).with_ball_envelopes(r_max=20.0, points=2001)
    grid = np.linspace(0.0, 20.0, 201)
    ball_lower = ws.component("ball-lower")(grid)
    ball_upper = ws.component("ball-upper")(grid)
    assert np.all(np.diff(ball_lower) <= 1e-12)
    assert np.all(np.diff(ball_upper) >= -1e-12)
    assert ball_lower[-1] == pytest.approx(0.5, abs=1e-4)
    assert ball_upper[-1] == pytest.approx(2.5, abs=1e-4)


def test_weight_average():
    ws = WeightSpec.radial(weight_function("constant", value=1.0))
    assert weight_A(ws, "upper", 0.5, 3) == pytest.approx(0.5 / 3.0)
    assert weight_A(ws, "lower", np.array([10.0]), 3) == pytest.approx([10.0 / 3.0])
    assert weight_A(ws, "upper", 0.0, 2) == 0.0
    with pytest.raises(DomainError):
        average_weight(ws.upper, 1.0, 0)


def test_cumulative_average():
    rho = weight_function("saturating", value=1.0)
    grid = np.linspace(0.0, 10.0, 101)
    table = cumulative_average(rho, grid, 3)
    assert table[0] == 0.0
    assert table[1:] == pytest.approx(average_weight(rho, grid[1:], 3), rel=1e-9)
    with pytest.raises(DomainError):
        cumulative_average(rho, grid[1:], 3)
