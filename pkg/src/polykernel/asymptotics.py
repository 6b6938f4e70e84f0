"""Desk-scale verification harnesses for the bulk and off-diagonal limits.

Four measurements, all deterministic given their parameters:

* blow-up comparison: rescaled weighted kernel modulus at a bulk point
  against the Laguerre bulk profile |L^1_{q-1}(|xi - lambda|^2)| e^{-|xi-lambda|^2/2},
  with a log-log rate fit of the sup error over an m ladder;
* off-diagonal decay scans of log |weighted kernel|^2 along rays, with the
  per-m slope reported in units of sqrt(m) (separations are chosen
  proportional to m^{-1/2} so the rescaled slope is comparable across the
  ladder);
* outside-droplet decay margins log G(z) + m (Q - Qhat)(z) - 2 log m, which
  must stay bounded by a constant calibrated at a reference m;
* the droplet diagonal bound G(z) <= m (8 + 48 A^2) e^A with
  A = sup of the quarter-Laplacian within distance 1 of the droplet (q = 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .kernel import KernelEvaluator, LOG_FLOOR
from .localexpansion import _laguerre1
from .weights import RadialEquilibrium, WeightModel


def _require_bulk(K: KernelEvaluator, z0: complex) -> float:
    R = K.equilibrium.droplet_radius
    dq = K.weight.delta_q(z0)
    if not (abs(z0) < R):
        raise ConfigurationError(f"z0 = {z0} is outside the open droplet (R = {R:.6g})")
    if not (dq > 0.0):
        raise ConfigurationError(f"quarter-Laplacian at z0 = {z0} is not positive")
    return float(dq)


def bulk_limit_profile(q: int, t):
    """|L^1_{q-1}(t^2)| e^{-t^2/2}: modulus of the universal bulk kernel."""
    t = np.asarray(t, dtype=float)
    return np.abs(_laguerre1(q - 1, t * t)) * np.exp(-0.5 * t * t)


@dataclass
class BlowupResult:
    """Error field of one blow-up comparison at a single m."""

    m: float
    n: int
    xi: np.ndarray
    lam: np.ndarray
    errors: np.ndarray
    sup_error: float


def blowup_grid(grid_radius: float, grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    """Default comparison set: (xi, 0) plane plus the diagonal slice (xi, -xi)."""
    side = np.linspace(-grid_radius, grid_radius, grid_n)
    xi = (side[:, None] + 1j * side[None, :]).ravel()
    return np.concatenate([xi, xi]), np.concatenate([np.zeros_like(xi), -xi])


def blowup_compare(K: KernelEvaluator, z0: complex, grid_radius: float = 2.5,
                   grid_n: int = 17) -> BlowupResult:
    """Rescaled weighted kernel modulus versus the Laguerre bulk profile."""
    dq = _require_bulk(K, z0)
    m = K.spec.m
    xi, lam = blowup_grid(grid_radius, grid_n)
    scale = 1.0 / math.sqrt(m * dq)
    z = z0 + xi * scale
    w = z0 + lam * scale
    measured = np.exp(K.log_abs_weighted_kernel(z, w)) / (m * dq)
    target = bulk_limit_profile(K.spec.q, np.abs(xi - lam))
    errors = np.abs(measured - target)
    return BlowupResult(m=m, n=K.spec.n, xi=xi, lam=lam, errors=errors,
                        sup_error=float(errors.max()))


def rate_fit(ms, sup_errors) -> tuple[float, str]:
    """Least-squares slope of log(sup error) against log(m).

    Returns (-inf, "zero-errors") when any error vanishes exactly, which
    happens only for degenerate synthetic inputs.
    """
    ms = np.asarray(ms, dtype=float)
    errs = np.asarray(sup_errors, dtype=float)
    if ms.size < 2:
        raise ConfigurationError("rate_fit needs at least 2 ladder points")
    if np.any(errs == 0.0):
        return float("-inf"), "zero-errors"
    slope = float(np.polyfit(np.log(ms), np.log(errs), 1)[0])
    return slope, ""


@dataclass
class BlowupReport:
    weight: str
    q: int
    z0: complex
    grid_radius: float
    grid_n: int
    ms: list[float]
    ns: list[int]
    sup_errors: list[float]
    slope: float
    slope_flag: str
    results: list[BlowupResult] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "q": self.q,
            "z0": [self.z0.real, self.z0.imag],
            "grid": {"radius": self.grid_radius, "n": self.grid_n},
            "m": list(map(float, self.ms)),
            "n": list(map(int, self.ns)),
            "errors": [list(map(float, r.errors)) for r in self.results],
            "sup_error": list(map(float, self.sup_errors)),
            "slope": self.slope,
            "slope_flag": self.slope_flag,
        }


def blowup_ladder(weight: WeightModel, q: int, z0: complex, ms, n_of_m=None,
                  grid_radius: float = 2.5, grid_n: int = 17,
                  space_builder=None) -> BlowupReport:
    """Blow-up comparison over an m ladder plus the fitted log-log rate."""
    from .kernel import SpaceSpec, build_space

    build = space_builder or (lambda mm, nn: build_space(weight, SpaceSpec(q, nn, mm)))
    n_of_m = n_of_m or (lambda mm: int(round(mm)))
    results, ns = [], []
    for m in ms:
        n = int(n_of_m(m))
        K = build(m, n)
        results.append(blowup_compare(K, z0, grid_radius, grid_n))
        ns.append(n)
    sup = [r.sup_error for r in results]
    if len(results) >= 2:
        slope, flag = rate_fit(ms, sup)
    else:
        slope, flag = float("nan"), "insufficient-ladder"
    return BlowupReport(weight=weight.spec_string(), q=q, z0=complex(z0),
                        grid_radius=grid_radius, grid_n=grid_n,
                        ms=list(map(float, ms)), ns=ns, sup_errors=sup,
                        slope=slope, slope_flag=flag, results=results)


# ---------------------------------------------------------------------------
# Off-diagonal decay
# ---------------------------------------------------------------------------


def bulk_clearance(eq: RadialEquilibrium, z0: complex) -> float:
    """Quarter of the distance from z0 to the complement of the bulk."""
    R = eq.droplet_radius
    if not abs(z0) < R:
        raise ConfigurationError(f"z0 = {z0} is not interior to the droplet")
    dist = R - abs(z0)
    if eq.weight.delta_q(0.0) <= 0.0 and abs(z0) > 0.0:
        dist = min(dist, abs(z0))
    return 0.25 * dist


@dataclass
class DecayScan:
    """One off-diagonal scan of log |weighted kernel|^2 at a single m."""

    m: float
    n: int
    separations: np.ndarray
    log_values: np.ndarray    # (n_directions, n_separations)
    floored: np.ndarray       # True where the value underflowed the log floor
    beta: float               # slope of direction-averaged log value vs s
    beta_over_sqrt_m: float


def offdiagonal_scan(K: KernelEvaluator, z0: complex, directions,
                     separations) -> DecayScan:
    dq = _require_bulk(K, z0)
    del dq
    R = K.equilibrium.droplet_radius
    dirs = np.asarray(directions, dtype=complex).ravel()
    dirs = dirs / np.abs(dirs)
    seps = np.asarray(separations, dtype=float).ravel()
    targets = z0 + seps[None, :] * dirs[:, None]
    if np.any(np.abs(targets) > R * (1.0 + 1e-12)):
        raise ConfigurationError("a scan point z0 + s*dir leaves the droplet")
    logs = 2.0 * np.asarray(
        K.log_abs_weighted_kernel(np.full(targets.shape, z0), targets)
    )
    floored = ~np.isfinite(logs) | (logs < LOG_FLOOR)
    logs = np.where(floored, LOG_FLOOR, logs)
    mean_logs = np.mean(logs, axis=0)
    keep = ~np.any(floored, axis=0)
    if keep.sum() < 2:
        raise ConfigurationError("too few unfloored separations for a decay fit")
    beta = float(np.polyfit(seps[keep], mean_logs[keep], 1)[0])
    return DecayScan(m=K.spec.m, n=K.spec.n, separations=seps, log_values=logs,
                     floored=floored, beta=beta,
                     beta_over_sqrt_m=beta / math.sqrt(K.spec.m))


@dataclass
class DecayReport:
    weight: str
    q: int
    z0: complex
    scans: list[DecayScan]
    stability: float          # max relative spread of beta/sqrt(m) across the ladder

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "q": self.q,
            "z0": [self.z0.real, self.z0.imag],
            "m": [s.m for s in self.scans],
            "n": [s.n for s in self.scans],
            "separations": [list(map(float, s.separations)) for s in self.scans],
            "log_values": [[list(map(float, row)) for row in s.log_values]
                           for s in self.scans],
            "beta": [s.beta for s in self.scans],
            "beta_over_sqrt_m": [s.beta_over_sqrt_m for s in self.scans],
            "stability": self.stability,
        }


def decay_ladder(weight: WeightModel, q: int, z0: complex, ms, n_of_m=None,
                 n_directions: int = 4, n_separations: int = 12,
                 u_range: tuple[float, float] = (0.3, 1.25),
                 space_builder=None) -> DecayReport:
    """Off-diagonal scans over an m ladder with microscopically scaled steps.

    Separations are u / sqrt(m) for a fixed u grid (capped at the bulk
    clearance radius), so the fitted slope divided by sqrt(m) measures the
    decay rate in microscopic units and is comparable across m.
    """
    from .kernel import SpaceSpec, build_space

    build = space_builder or (lambda mm, nn: build_space(weight, SpaceSpec(q, nn, mm)))
    n_of_m = n_of_m or (lambda mm: int(round(mm)))
    eq = RadialEquilibrium.solve(weight)
    r0 = bulk_clearance(eq, z0)
    dirs = np.exp(2j * np.pi * np.arange(n_directions) / n_directions)
    # keep every ray inside the droplet and within the clearance radius for
    # every m on the ladder: one u grid, scaled by m^{-1/2}, never clipped
    s_cap = min(r0, eq.droplet_radius - abs(z0))
    u_hi = min(u_range[1], 0.95 * s_cap * math.sqrt(min(ms)))
    u_lo = min(u_range[0], u_hi / 3.0)
    u = np.linspace(u_lo, u_hi, n_separations)
    scans = []
    for m in ms:
        seps = u / math.sqrt(m)
        K = build(m, int(n_of_m(m)))
        scans.append(offdiagonal_scan(K, z0, dirs, seps))
    ratios = np.array([s.beta_over_sqrt_m for s in scans])
    center = np.mean(ratios)
    stability = float(np.max(np.abs(ratios - center)) / max(abs(center), 1e-300))
    return DecayReport(weight=weight.spec_string(), q=q, z0=complex(z0),
                       scans=scans, stability=stability)


# ---------------------------------------------------------------------------
# Outside-droplet decay and diagonal bound
# ---------------------------------------------------------------------------


def offdroplet_margins(K: KernelEvaluator, direction: complex, radii) -> np.ndarray:
    """log G(z) + m (Q - Qhat)(z) - 2 log m along a ray outside the droplet.

    Bounded above by a weight-dependent constant when n <= m; the caller
    compares against a constant calibrated at a reference m.
    """
    eq = K.equilibrium
    m, n = K.spec.m, K.spec.n
    if n > m:
        raise ConfigurationError(f"outside-droplet bound requires n <= m (n={n}, m={m})")
    radii = np.asarray(radii, dtype=float).ravel()
    if np.any(radii <= eq.droplet_radius):
        raise ConfigurationError("all radii must exceed the droplet radius")
    d = complex(direction)
    d = d / abs(d)
    z = d * radii
    log_gamma = np.asarray(K.log_one_point_intensity(z))
    gap = np.asarray(eq.equilibrium_gap(z))
    return log_gamma + m * gap - 2.0 * math.log(m)


def offdroplet_decay_check(K: KernelEvaluator, direction: complex, radii,
                           calibration_constant: float,
                           safety_factor: float = 10.0) -> np.ndarray:
    """Margins minus the calibrated admissible constant (must be <= 0)."""
    bound = calibration_constant + math.log(safety_factor)
    return offdroplet_margins(K, direction, radii) - bound


def droplet_laplacian_sup(eq: RadialEquilibrium, pad: float = 1.0,
                          n_grid: int = 512) -> float:
    """sup of the quarter-Laplacian within distance pad of the droplet."""
    r = np.linspace(0.0, eq.droplet_radius + pad, n_grid)
    return float(np.max(eq.weight.delta_q(r)))


def diagonal_bound_check(K: KernelEvaluator, n_grid: int = 64) -> float:
    """Worst ratio of the intensity to m (8 + 48 A^2) e^A over the droplet."""
    if K.spec.q != 2:
        raise ConfigurationError("diagonal bound check applies to q = 2 only")
    eq = K.equilibrium
    a_sup = droplet_laplacian_sup(eq)
    bound = K.spec.m * (8.0 + 48.0 * a_sup**2) * math.exp(a_sup)
    r = np.linspace(0.0, eq.droplet_radius, n_grid)
    gamma = np.asarray(K.one_point_intensity(r.astype(complex)))
    return float(np.max(gamma) / bound)
