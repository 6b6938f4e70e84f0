"""Radial log-moments against closed forms and brute-force oracles."""

import math

import numpy as np
import pytest
from scipy.special import gammaln

import polykernel as pk
from polykernel.errors import ConfigurationError
from polykernel.quadrature import log_moment_table

GINIBRE = pk.parse_weight("ginibre")
POWER2 = pk.parse_weight("power:p=2")


def _trapezoid_moment_oracle(w: pk.WeightModel, m: float, p: int) -> float:
    """Brute-force log moment: 1e6-point trapezoid over a generous range."""
    from polykernel.quadrature import _moment_mode

    r_star = _moment_mode(w, m, p)
    hi = r_star
    def f_log(r):
        return (2 * p + 1) * np.log(r) - m * w.eval_weight(r)
    peak = f_log(r_star)
    while f_log(hi) - peak > -60 * math.log(10):
        hi *= 1.5
    r = np.linspace(1e-12, hi, 10**6)
    vals = np.exp(f_log(r) - peak)
    return peak + math.log(2.0 * np.trapezoid(vals, r))


def test_ginibre_moment_examples():
    assert pk.radial_log_moment(GINIBRE, 1.0, 3).log_value == pytest.approx(
        math.log(6.0), abs=1e-13)
    assert pk.radial_log_moment(GINIBRE, 50.0, 0).log_value == pytest.approx(
        math.log(1.0 / 50.0), abs=1e-13)


def test_ginibre_moments_closed_form_sweep():
    # log M_p = lgamma(p+1) - (p+1) log m, for p <= 200 and m in {1, 50, 200}
    for m in (1.0, 50.0, 200.0):
        for p in range(0, 201, 10):
            got = pk.radial_log_moment(GINIBRE, m, p).log_value
            expect = float(gammaln(p + 1) - (p + 1) * math.log(m))
            assert abs(got - expect) < 1e-12, (m, p)


def test_ginibre_moment_ratio():
    for p in (0, 3, 17):
        a = pk.radial_log_moment(GINIBRE, 7.0, p).log_value
        b = pk.radial_log_moment(GINIBRE, 7.0, p + 1).log_value
        assert math.exp(b - a) == pytest.approx((p + 1) / 7.0, rel=1e-12)


def test_power2_moment_vs_trapezoid_oracle():
    got = pk.radial_log_moment(POWER2, 10.0, 0).log_value
    oracle = _trapezoid_moment_oracle(POWER2, 10.0, 0)
    assert got == pytest.approx(oracle, abs=5e-9)
    # closed form for this case: M_0 = Gamma(3/2)/(2 ...) via u = r^4:
    # 2 int r e^{-10 r^4} dr = (1/2) 10^{-1/2} Gamma(1/2) = sqrt(pi/10)/2
    assert got == pytest.approx(math.log(math.sqrt(math.pi / 10.0) / 2.0), abs=1e-13)


def test_radialpoly_moment_vs_trapezoid_oracle():
    w = pk.parse_weight("radialpoly:c=1,0.5")
    for m, p in ((5.0, 0), (20.0, 7)):
        got = pk.radial_log_moment(w, m, p).log_value
        assert got == pytest.approx(_trapezoid_moment_oracle(w, m, p), abs=5e-9)


def test_moment_log_convexity():
    logs = log_moment_table(POWER2, 30.0, 60)
    inc = np.diff(logs)
    assert np.all(np.diff(inc) > -1e-12)


def test_moment_guards():
    with pytest.raises(ConfigurationError):
        pk.radial_log_moment(GINIBRE, 0.0, 1)
    with pytest.raises(ConfigurationError):
        pk.radial_log_moment(GINIBRE, 1.0, -1)


def test_polar_grid_gaussian():
    val = pk.integrate_polar_grid(lambda z: np.exp(-np.abs(z) ** 2), 10.0, 200, 32)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_polar_grid_smooth_indicator():
    # smooth unit-disk indicator: the analytic radial limit is
    # 2 int r e^{-r^40} dr = Gamma(1 + 1/20) = 0.97350..., close to 1
    from scipy.special import gamma

    val = pk.integrate_polar_grid(lambda z: np.exp(-np.abs(z) ** 40), 3.0, 400, 32)
    assert val == pytest.approx(float(gamma(1.05)), abs=1e-10)
    assert val == pytest.approx(1.0, abs=3e-2)


def test_polar_grid_zero():
    assert pk.integrate_polar_grid(lambda z: np.zeros_like(z, dtype=float), 2.0, 32, 32) == 0.0


def test_polar_grid_refinement_convergence():
    f = lambda z: np.exp(-np.abs(z) ** 2) * (1.0 + np.real(z) ** 2)
    coarse = pk.integrate_polar_grid(f, 8.0, 128, 32)
    fine = pk.integrate_polar_grid(f, 8.0, 256, 64)
    assert abs(coarse - fine) < 1e-8


def test_polar_grid_guards():
    with pytest.raises(ConfigurationError):
        pk.integrate_polar_grid(lambda z: z, -1.0, 32, 32)
    with pytest.raises(ConfigurationError):
        pk.integrate_polar_grid(lambda z: z, 1.0, 8, 32)
