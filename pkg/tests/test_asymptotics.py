"""Blow-up, decay, and bound harnesses on small deterministic instances."""

import math

import numpy as np
import pytest

import polykernel as pk
from polykernel.asymptotics import blowup_compare, bulk_clearance, bulk_limit_profile
from polykernel.errors import ConfigurationError

GINIBRE = pk.parse_weight("ginibre")
POWER2 = pk.parse_weight("power:p=2")


def test_rate_fit_synthetic():
    ms = [40.0, 80.0, 160.0]
    slope, flag = pk.rate_fit(ms, [m ** -0.5 for m in ms])
    assert flag == "" and slope == pytest.approx(-0.5, abs=1e-12)
    slope, flag = pk.rate_fit(ms, [0.7, 0.7, 0.7])
    assert slope == pytest.approx(0.0, abs=1e-12)
    slope, flag = pk.rate_fit(ms, [0.1, 0.0, 0.1])
    assert slope == float("-inf") and flag == "zero-errors"
    with pytest.raises(ConfigurationError):
        pk.rate_fit([40.0], [0.1])


def test_bulk_limit_profile_values():
    assert bulk_limit_profile(2, 0.0) == pytest.approx(2.0)  # L^1_1(0) = 2
    assert bulk_limit_profile(1, 1.3) == pytest.approx(math.exp(-0.5 * 1.69))
    assert bulk_limit_profile(2, math.sqrt(2.0)) == pytest.approx(0.0, abs=1e-14)


def test_blowup_preconditions(spaces):
    K = spaces("ginibre", 2, 20, 20.0)
    with pytest.raises(ConfigurationError):
        blowup_compare(K, 1.5)  # outside the droplet
    Kp = spaces("power:p=2", 2, 20, 20.0)
    with pytest.raises(ConfigurationError):
        blowup_compare(Kp, 0.0)  # quarter-Laplacian vanishes at the origin


def test_blowup_ginibre_exact_collapse():
    # above the truncation threshold the rescaled comparison is exact
    for q in (1, 2):
        m = 40.0
        grid_radius = 2.0
        r_eff = 0.5 + grid_radius / math.sqrt(m)
        n = int(math.ceil(m * r_eff**2 + 12.0 * math.sqrt(m) * r_eff + 40.0))
        K = pk.build_space(GINIBRE, pk.SpaceSpec(q, n, m))
        res = blowup_compare(K, 0.5, grid_radius=grid_radius, grid_n=9)
        assert res.sup_error < 1e-9


def test_blowup_report_serialization():
    rep = pk.blowup_ladder(GINIBRE, 2, 0.3, [20.0, 40.0], grid_radius=1.5, grid_n=7)
    d = rep.to_dict()
    assert d["weight"] == "ginibre" and d["q"] == 2
    assert len(d["sup_error"]) == 2 and d["n"] == [20, 40]
    assert isinstance(d["slope"], float)


def test_bulk_clearance_geometry():
    eq = pk.RadialEquilibrium.solve(GINIBRE)
    assert bulk_clearance(eq, 0.0) == pytest.approx(0.25)
    eq2 = pk.RadialEquilibrium.solve(POWER2)
    z0 = 0.6 * eq2.droplet_radius
    # the quarter-Laplacian vanishes at the origin, so the origin bounds the bulk
    expect = 0.25 * min(eq2.droplet_radius - z0, z0)
    assert bulk_clearance(eq2, z0) == pytest.approx(expect)
    with pytest.raises(ConfigurationError):
        bulk_clearance(eq, 1.2)


def test_offdiagonal_scan_consistency(spaces):
    K = spaces("ginibre", 2, 20, 20.0)
    seps = np.array([1e-9, 0.05, 0.1, 0.15, 0.2])
    scan = pk.offdiagonal_scan(K, 0.0, [1.0, 1j], seps)
    # s ~ 0 recovers twice the log intensity at the centre
    expect = 2.0 * math.log(K.one_point_intensity(0.0))
    assert scan.log_values[0, 0] == pytest.approx(expect, rel=1e-9)
    assert scan.beta < 0.0


def test_offdiagonal_scan_gaussian_oracle():
    # full-space analytic case: log |weighted|^2 = 2 log m - m s^2
    m = 40.0
    K = pk.build_space(GINIBRE, pk.SpaceSpec(1, 140, m))
    seps = np.linspace(0.02, 0.2, 6)
    scan = pk.offdiagonal_scan(K, 0.0, [1.0], seps)
    expect = 2.0 * math.log(m) - m * seps**2
    assert np.max(np.abs(scan.log_values[0] - expect)) < 1e-8


def test_offdiagonal_scan_preconditions(spaces):
    K = spaces("ginibre", 2, 20, 20.0)
    with pytest.raises(ConfigurationError):
        pk.offdiagonal_scan(K, 0.9, [1.0], [0.3])  # ray exits the droplet


def test_blowup_slope_band_power2():
    weight = POWER2
    z0 = 0.6 * pk.droplet_radius(weight)
    rep = pk.blowup_ladder(weight, 2, z0, [40.0, 80.0, 160.0],
                           grid_radius=2.0, grid_n=9)
    assert -1.2 <= rep.slope <= -0.4


def test_fixed_separation_sqrtm_correlation():
    # at the droplet centre the analytic-family kernel column is closed form,
    # so log |weighted|^2 = 2 log m - m s^2 exactly at any truncation; over a
    # geometric ladder the fit against sqrt(m) is strongly linear
    s = 0.245
    ms = [100.0, 140.0, 196.0, 274.0]
    ys = []
    for m in ms:
        K = pk.build_space(GINIBRE, pk.SpaceSpec(1, int(m), m))
        scan = pk.offdiagonal_scan(K, 0.0, [1.0], [s, 0.999 * s])
        ys.append(scan.log_values[0, 0])
        assert ys[-1] == pytest.approx(2.0 * math.log(m) - m * s * s, abs=1e-10)
    corr = float(np.corrcoef(np.sqrt(ms), ys)[0, 1])
    assert corr < -0.99


def test_decay_ladder_stability_small():
    rep = pk.decay_ladder(GINIBRE, 2, 0.0, [40.0, 80.0], n_directions=2,
                          n_separations=8)
    assert all(s.beta_over_sqrt_m < 0.0 for s in rep.scans)
    assert rep.stability < 0.3
    d = rep.to_dict()
    assert len(d["beta_over_sqrt_m"]) == 2


def test_offdroplet_margins_bounded(spaces):
    radii = np.array([1.1, 1.3, 1.6, 2.0])
    cal = pk.offdroplet_margins(spaces("ginibre", 2, 20, 20.0), 1.0, radii).max()
    margins40 = pk.offdroplet_margins(spaces("ginibre", 2, 40, 40.0), 1.0, radii)
    assert margins40.max() <= cal + 0.1 * abs(cal)
    checks = pk.offdroplet_decay_check(spaces("ginibre", 2, 40, 40.0), 1.0, radii,
                                       calibration_constant=cal)
    assert np.all(checks <= 0.0)


def test_offdroplet_preconditions(spaces):
    K = spaces("ginibre", 2, 20, 20.0)
    with pytest.raises(ConfigurationError):
        pk.offdroplet_margins(K, 1.0, [0.9])  # inside the droplet
    Kbad = pk.build_space(GINIBRE, pk.SpaceSpec(2, 22, 20.0))  # n > m
    with pytest.raises(ConfigurationError):
        pk.offdroplet_margins(Kbad, 1.0, [1.5])


def test_diagonal_bound(spaces):
    ratio = pk.diagonal_bound_check(spaces("ginibre", 2, 40, 40.0))
    assert ratio < 1.0
    # bulk density 2m against m (8 + 48) e for unit quarter-Laplacian
    assert ratio == pytest.approx(2.0 / (56.0 * math.e), rel=0.05)
    assert pk.diagonal_bound_check(spaces("power:p=2", 2, 20, 20.0)) < 1.0
    assert pk.diagonal_bound_check(spaces("ginibre", 2, 1, 1.0)) < 1.0
    with pytest.raises(ConfigurationError):
        pk.diagonal_bound_check(spaces("ginibre", 1, 2, 1.0))


def test_harness_determinism():
    from polykernel.reporting import json_dumps

    a = pk.blowup_ladder(GINIBRE, 2, 0.3, [20.0, 30.0], grid_radius=1.0, grid_n=5)
    b = pk.blowup_ladder(GINIBRE, 2, 0.3, [20.0, 30.0], grid_radius=1.0, grid_n=5)
    assert json_dumps(a.to_dict()) == json_dumps(b.to_dict())
