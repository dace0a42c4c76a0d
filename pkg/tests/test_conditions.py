import numpy as np
import pytest

from largesol import (
    ConfigurationError,
    DomainError,
    NonlinearitySpec,
    PhiSpec,
    WeightSpec,
    check_A_rho,
    check_h_inv_subadditive,
    check_KO,
    compute_H_bar,
    compute_H_tilde,
    ko_envelopes,
)
from largesol.conditions import classify_increments
from largesol.problems import weight_function

CUTOFFS = [10.0**k for k in range(1, 7)]


def test_classify_increments():
    converging = [1.0 - c**-1.0 for c in CUTOFFS]
    verdict, confidence, slope, _ = classify_increments(CUTOFFS, converging)
    assert (verdict, confidence) == ("converges", "fitted")
    assert slope == pytest.approx(-1.0, abs=1e-6)

    diverging = [float(k) for k in range(1, 7)]
    verdict, _, slope, residual = classify_increments(CUTOFFS, diverging)
    assert verdict == "diverges"
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert residual == pytest.approx(0.0, abs=1e-12)

    assert classify_increments(CUTOFFS, [0.0] * 6)[:2] == ("converges", "sampled")


def test_ko_analytic():
    report = check_KO(PhiSpec.power(2.0), NonlinearitySpec.power(3.0))
    assert report.converges
    assert report.confidence == "analytic"
    assert report.fitted_verdict == "converges"
    assert report.cutoffs == CUTOFFS
    assert np.all(np.diff(report.partial_values) > 0.0)

    report = check_KO(PhiSpec.power(2.0), NonlinearitySpec.power(1.0))
    assert report.diverges
    assert report.confidence == "analytic"


@pytest.mark.parametrize(
    "p, gamma",
    [
        (1.5, 0.3),
        (1.5, 1.0),
        (1.5, 3.0),
        (2.0, 0.3),
        (2.0, 0.5),
        (2.0, 1.5),
        (2.0, 4.0),
        (3.0, 0.3),
        (3.0, 1.5),
        (3.0, 2.5),
        (3.0, 6.0),
    ],
)
def test_ko_fitted_matches_analytic(p, gamma):
    phi = PhiSpec.power(p)
    nl = NonlinearitySpec.power(gamma)
    fitted = check_KO(phi, nl, analytic=False)
    analytic = check_KO(phi, nl)
    assert fitted.confidence == "fitted"
    assert fitted.verdict == analytic.verdict
    assert analytic.converges == (gamma > p - 1.0)


def test_ko_fitted_for_unit_phi(unit_phi):
    report = check_KO(unit_phi, NonlinearitySpec.power(2.0))
    assert report.confidence == "fitted"
    assert report.converges
    assert report.fitted_tail_exponent == pytest.approx(-0.5, abs=1e-6)


def test_ko_degenerate_nonlinearity():
    vanishing = NonlinearitySpec("custom", f=lambda t: np.zeros_like(t))
    with pytest.raises(DomainError):
        check_KO(PhiSpec.power(2.0), vanishing)


def test_ko_cutoffs_are_checked():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
    with pytest.raises(DomainError):
        check_KO(phi, nl, cutoffs=[10.0, 5.0])
    with pytest.raises(DomainError):
        check_KO(phi, nl, cutoffs=[0.5, 5.0])
    with pytest.raises(DomainError):
        check_KO(phi, nl, cutoffs=[])


def test_ko_envelopes_pinch_for_power():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(3.0)
    envelopes = ko_envelopes(phi, nl)
    partials = check_KO(phi, nl).partial_values
    assert envelopes["lower"] == pytest.approx(partials, rel=1e-8)
    assert envelopes["upper"] == pytest.approx(partials, rel=1e-8)


def test_ko_envelopes_enclose():
    phi, nl = PhiSpec.p_and_q(2.0, 4.0), NonlinearitySpec.power(3.0)
    envelopes = ko_envelopes(phi, nl, cutoffs=[10.0, 100.0, 1000.0])
    partials = check_KO(phi, nl, cutoffs=[10.0, 100.0, 1000.0]).partial_values
    for low, value, high in zip(envelopes["lower"], partials, envelopes["upper"]):
        assert low <= value * (1 + 1e-9)
        assert value <= high * (1 + 1e-9)


def test_growth_condition_holds_for_constant_weight():
    ws = WeightSpec.radial(weight_function("constant", value=1.0))
    report = check_A_rho(PhiSpec.power(2.0), ws, "lower", 3)
    assert report.condition_id == "A-rho"
    assert report.diverges
    assert report.notes == ["growth condition holds for the lower weight"]


def test_growth_condition_fails_for_decaying_weight():
    ws = WeightSpec.radial(weight_function("algebraic-decay", value=1.0, exponent=4.0))
    report = check_A_rho(PhiSpec.power(2.0), ws, "lower", 3)
    assert report.converges
    assert report.fitted_tail_exponent == pytest.approx(-1.0, abs=0.05)


def test_oscillation_budget_vanishes_for_radial_weight():
    ws = WeightSpec.radial(weight_function("constant", value=1.0))
    report = compute_H_bar(PhiSpec.power(2.0), NonlinearitySpec.power(0.5), ws, 3, 50.0)
    assert report.value == 0.0
    assert report.confidence == "analytic"
    with pytest.raises(DomainError):
        compute_H_bar(PhiSpec.power(2.0), NonlinearitySpec.power(0.5), ws, 3, 0.0)


def test_oscillation_budget_grows_with_amplitude():
    phi, nl = PhiSpec.power(2.0), NonlinearitySpec.power(0.5)
    one = weight_function("constant", value=1.0)
    values = []
    for amplitude in (0.25, 0.5, 1.0):
        ws = WeightSpec.bounds(lambda r, c=amplitude: 1.0 - c * np.exp(-r), one)
        report = compute_H_bar(phi, nl, ws, 3, 50.0)
        assert report.condition_id == "H-bar"
        values.append(report.value)
    assert 0.0 < values[0] < values[1] < values[2]
    assert values[2] == pytest.approx(2.0 * values[1], rel=1e-6)


def test_ball_budget():
    nl = NonlinearitySpec.power(0.5)
    radial = WeightSpec.radial(weight_function("constant", value=1.0))
    radial = radial.with_ball_envelopes(r_max=50.0)
    report = compute_H_tilde(PhiSpec.power(2.0), nl, radial, 3, 50.0)
    assert report.value == 0.0

    doubled = WeightSpec.radial(weight_function("constant", value=2.0))
    doubled = doubled.with_ball_envelopes(r_max=50.0)
    report = compute_H_tilde(PhiSpec.p_and_q(2.0, 4.0), nl, doubled, 3, 50.0)
    assert report.condition_id == "H-tilde"
    assert report.value > 0.0

    with pytest.raises(ConfigurationError):
        bare = WeightSpec.radial(lambda r: 1.0)
        compute_H_tilde(PhiSpec.power(2.0), nl, bare, 3, 50.0)


def test_subadditivity():
    assert check_h_inv_subadditive(PhiSpec.power(2.0)).holds
    assert check_h_inv_subadditive(PhiSpec.power(3.0)).holds

    report = check_h_inv_subadditive(PhiSpec.power(1.5), seed=3)
    assert report.verdict == "fails"
    witness = report.witness
    assert witness["violation"] > 0.0
    assert witness["s"] > 0.0 and witness["t"] > 0.0


def test_subadditivity_is_reproducible():
    first = check_h_inv_subadditive(PhiSpec.power(1.5), seed=11)
    second = check_h_inv_subadditive(PhiSpec.power(1.5), seed=11)
    assert first.as_dict() == second.as_dict()


def test_subadditivity_needs_samples():
    with pytest.raises(DomainError):
        check_h_inv_subadditive(PhiSpec.power(2.0), samples=100)
