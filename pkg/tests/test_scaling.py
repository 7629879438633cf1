import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gensqueeze import Cutoff, FitError, ValidationError
from gensqueeze.scaling import (
    FitModel,
    Quantity,
    ScalingPoint,
    SweepError,
    extrapolate_gap,
    fit_exponential_in_order,
    fit_logarithmic,
    fit_power_law,
    gap_point,
    max_mean_photon_point,
    sweep_gap,
    sweep_gap_over_order,
    sweep_max_mean_photon,
)


def test_scaling_point_validation():
    with pytest.raises(ValidationError):
        ScalingPoint(3, 300, Cutoff.HARD, Quantity.DOMINANT_GAP, 0.0)
    with pytest.raises(ValidationError):
        ScalingPoint(3, 300, Cutoff.HARD, Quantity.DOMINANT_GAP, math.inf)


def test_power_law_exact():
    fit = fit_power_law([(x, x * x) for x in (2.0, 5.0, 10.0, 40.0)])
    assert fit.model is FitModel.POWER_LAW
    assert fit.parameters["exponent"] == pytest.approx(2.0, abs=1e-12)
    assert fit.parameters["prefactor"] == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        fit_power_law([(1, 1), (2, -1), (3, 2)])
    with pytest.raises(ValidationError):
        fit_power_law([(1, 1), (2, 2)])


def test_logarithmic_exact():
    fit = fit_logarithmic([(x, 3 * math.log(x)) for x in (2.0, 5.0, 10.0, 40.0)])
    assert fit.parameters["slope"] == pytest.approx(3.0, abs=1e-12)
    assert fit.parameters["intercept"] == pytest.approx(0.0, abs=1e-11)


def test_exponential_in_order_exact():
    b = 0.83
    fit = fit_exponential_in_order([(n, 2.5 * math.exp(-b * n)) for n in (3, 4, 5, 6)])
    assert fit.parameters["slope"] == pytest.approx(-b, abs=1e-10)
    with pytest.raises(ValidationError):
        fit_exponential_in_order([(3, 1.0), (4, 0.0), (5, 2.0)])


def test_gap_extrapolation_synthetic():
    pts = [(N, 3.5 + 10 * N ** -0.7) for N in (1500, 3000, 6000, 12000)]
    fit = extrapolate_gap(pts)
    assert fit.parameters["asymptote"] == pytest.approx(3.5, abs=1e-3)
    assert fit.parameters["beta"] == pytest.approx(0.7, abs=0.01)
    with pytest.raises(ValidationError):
        extrapolate_gap(pts[:3])


def test_gap_extrapolation_failure():
    pts = [(1000, 5.0), (2000, 1.0), (3000, 4.0), (4000, 2.0)]
    with pytest.raises(FitError) as info:
        extrapolate_gap(pts)
    assert info.value.residuals is not None


def test_model_discrimination():
    pts = [(N, 2.0 + 1.5 * math.log(N)) for N in np.geomspace(100, 1000, 6)]
    assert fit_logarithmic(pts).r_squared > fit_power_law(pts).r_squared


@given(st.permutations(list(range(5))))
@settings(max_examples=20)
def test_fits_reorder_invariant(perm):
    base = [(N, 1.3 * N**0.55 * (1 + 0.01 * (-1) ** i)) for i, N in enumerate((600, 1200, 3000, 6000, 12000))]
    shuffled = [base[i] for i in perm]
    for fit in (fit_power_law, fit_logarithmic):
        a, b = fit(base), fit(shuffled)
        assert a.parameters == b.parameters
        assert a.r_squared == b.r_squared
    gaps = [(N, 3.5 + 2 * N**-0.5) for N, _ in base]
    assert extrapolate_gap(gaps).parameters == extrapolate_gap([gaps[i] for i in perm]).parameters


def test_max_mean_photon_point_n4():
    p = max_mean_photon_point(4, 400, Cutoff.SOFT, r_max=1.0)
    assert p.quantity is Quantity.MAX_MEAN_PHOTON
    assert abs(p.r_at_max - 0.37) <= 0.02
    assert p.value > 0


def test_sweep_deterministic_and_ordered():
    a = sweep_max_mean_photon(3, [300, 150], Cutoff.HARD, r_max=2.0)
    b = sweep_max_mean_photon(3, [300, 150], Cutoff.HARD, r_max=2.0)
    assert [p.N for p in a] == [300, 150]
    assert [p.value for p in a] == [p.value for p in b]
    g = sweep_gap(3, [300, 600])
    assert g[0].value > g[1].value > 0
    assert gap_point(3, 300).value == g[0].value


def test_sweep_reports_failing_dimension():
    with pytest.raises(SweepError) as info:
        sweep_gap(3, [300, 301])
    assert info.value.N == 301


def test_sweep_parallel_matches_serial():
    serial = sweep_gap(3, [150, 300, 600], jobs=1)
    parallel = sweep_gap(3, [150, 300, 600], jobs=2)
    assert [p.value for p in serial] == [p.value for p in parallel]


def test_n2_off_trend():
    pts = [(p.n, p.value) for p in sweep_gap_over_order([3, 4, 5, 6], 300)]
    with_n2 = [(p.n, p.value) for p in sweep_gap_over_order([2, 3, 4, 5, 6], 300)]
    assert fit_exponential_in_order(with_n2).r_squared < fit_exponential_in_order(pts).r_squared
