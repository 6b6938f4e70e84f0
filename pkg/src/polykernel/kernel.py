"""Gram factorization and evaluation of polyanalytic polynomial kernels.

The space span{conj(z)^r z^j : 0 <= r < q, 0 <= j < n} carries the inner
product of L^2(e^{-mQ} dA).  For a radial weight the monomial Gram matrix is
block diagonal: <conj(z)^s z^k, conj(z)^r z^j> vanishes unless j - r = k - s,
and within the degree-offset-d block the entry is the radial moment
M_{r+s+d}.  Each block (size at most q) is scaled to unit diagonal by
D^{-1/2} G D^{-1/2}, whose entries are moment ratios near 1, and Cholesky
factored; an nq-dimensional ill-conditioned problem becomes at most n+q-1
tiny well-conditioned ones, which keeps m ~ 200 inside double precision.

Evaluation never exponentiates a large log: the monomials of block d share
the phase e^{i d arg z}, so each block reduces to a real vector t of scaled
log-magnitudes, shifted by its running maximum before exponentiation.  Block
contributions recombine under a global running scale, and the weight factors
e^{-mQ/2} fold into the per-monomial logs, never applied afterwards.

A KernelEvaluator is immutable after construction and safe for concurrent
evaluation from many threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import ConfigurationError, NumericalDegeneracyError
from .quadrature import log_moment_table, integrate_polar_grid
from .weights import RadialEquilibrium, WeightModel

CONDITION_ESCALATION_LIMIT = 1e12
NEGATIVE_DET_CLAMP = 1e-10
LOG_FLOOR = -745.0  # double underflow boundary for logged magnitudes


@dataclass(frozen=True)
class SpaceSpec:
    """Parameters (q, n, m): polyanalytic order, degree count, scaling."""

    q: int
    n: int
    m: float

    def __post_init__(self):
        if not (isinstance(self.q, (int, np.integer)) and self.q >= 1):
            raise ConfigurationError(f"SpaceSpec needs integer q >= 1, got {self.q!r}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigurationError(f"SpaceSpec needs integer n >= 1, got {self.n!r}")
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ConfigurationError(f"SpaceSpec needs m > 0, got {self.m!r}")

    @property
    def dim(self) -> int:
        return self.q * self.n


@dataclass(frozen=True)
class _Block:
    """One degree-offset block of the Gram factorization."""

    d: int
    r_values: np.ndarray      # basis rows (r, j=r+d) present in this block
    p_values: np.ndarray      # magnitude exponents 2r + d
    chol: np.ndarray          # lower Cholesky factor of the scaled block
    condition: float


class GramFactorization:
    """Log-moment table plus per-offset scaled Cholesky factors."""

    def __init__(self, weight: WeightModel, spec: SpaceSpec):
        self.weight = weight
        self.spec = spec
        q, n, m = spec.q, spec.n, spec.m
        self.log_moments = log_moment_table(weight, m, n + q - 2)
        self.blocks: list[_Block] = []
        self.condition_report: dict[int, float] = {}
        total = 0
        for d in range(-(q - 1), n):
            r_lo, r_hi = max(0, -d), min(q - 1, n - 1 - d)
            r = np.arange(r_lo, r_hi + 1)
            p = 2 * r + d
            scaled = self._scaled_block(d, r)
            cond = float(np.linalg.cond(scaled))
            if cond > CONDITION_ESCALATION_LIMIT or not np.isfinite(cond):
                chol, cond = self._escalated_cholesky(d, r)
            else:
                try:
                    chol = np.linalg.cholesky(scaled)
                except np.linalg.LinAlgError:
                    chol, cond = self._escalated_cholesky(d, r)
            self.condition_report[d] = cond
            self.blocks.append(_Block(d, r, p, chol, cond))
            total += r.size
        if total != spec.dim:
            raise NumericalDegeneracyError(
                f"block index sets cover {total} basis elements, expected {spec.dim}"
            )

    def _scaled_block(self, d: int, r: np.ndarray) -> np.ndarray:
        logm = self.log_moments
        p = 2 * r + d
        cross = logm[r[:, None] + r[None, :] + d]
        return np.exp(cross - 0.5 * logm[p][:, None] - 0.5 * logm[p][None, :])

    def _escalated_cholesky(self, d: int, r: np.ndarray) -> tuple[np.ndarray, float]:
        """Recompute one block's moments and Cholesky in 40-digit arithmetic."""
        import mpmath as mp

        w, m = self.weight, self.spec.m
        with mp.workdps(40):
            def moment(p: int):
                from .quadrature import _moment_mode

                r_star = _moment_mode(w, m, p)
                integrand = lambda t: t ** (2 * p + 1) * mp.e ** (
                    -m * sum(c * t ** (2 * (k + 1)) for k, c in enumerate(w.coeffs))
                )
                pts = [0, r_star, 2 * r_star, 4 * r_star, mp.inf]
                return 2 * mp.quad(integrand, pts)

            needed = sorted({int(a + b + d) for a in r for b in r} | {int(2 * a + d) for a in r})
            mom = {p: moment(p) for p in needed}
            size = r.size
            g = mp.matrix(size, size)
            for i, a in enumerate(r):
                for j, b in enumerate(r):
                    g[i, j] = mom[int(a + b + d)] / mp.sqrt(
                        mom[int(2 * a + d)] * mom[int(2 * b + d)]
                    )
            try:
                low = mp.cholesky(g)
            except Exception as exc:
                raise NumericalDegeneracyError(
                    f"Gram block d={d} is numerically degenerate even at 40 digits "
                    f"(condition {self.condition_report.get(d, float('nan')):.3e})"
                ) from exc
            chol = np.array([[float(low[i, j]) for j in range(size)] for i in range(size)])
        scaled = chol @ chol.T
        return chol, float(np.linalg.cond(scaled))


class KernelEvaluator:
    """Evaluates the reproducing kernel and derived statistical quantities.

    Immutable; all evaluation paths stay in the log domain until the final
    recombination, so weighted quantities survive separations where the
    plain kernel would overflow or underflow doubles.
    """

    def __init__(self, factorization: GramFactorization):
        self.factorization = factorization
        self.weight = factorization.weight
        self.spec = factorization.spec
        self.equilibrium = RadialEquilibrium.solve(self.weight)

    # -- low-level block machinery ----------------------------------------

    def _side(self, z: np.ndarray, weight_power: float):
        """Per-block solved vectors with per-point log shifts for one side."""
        z = np.asarray(z, dtype=complex)
        absz = np.abs(z)
        with np.errstate(divide="ignore"):
            logr = np.log(absz)
        at_origin = ~np.isfinite(logr)
        logr_safe = np.where(at_origin, 0.0, logr)
        damp = -weight_power * self.spec.m * self.weight.eval_weight(z) \
            if weight_power else np.zeros_like(absz)
        ang = np.angle(z)
        logm = self.factorization.log_moments
        sides = []
        for blk in self.factorization.blocks:
            p = blk.p_values
            lt = p[:, None] * logr_safe[None, :]
            lt = np.where(at_origin[None, :] & (p[:, None] > 0), -np.inf, lt)
            lt = lt - 0.5 * logm[p][:, None] + damp[None, :]
            shift = np.max(lt, axis=0)
            safe = np.isfinite(shift)
            u = np.where(safe[None, :], np.exp(lt - np.where(safe, shift, 0.0)[None, :]), 0.0)
            a = solve_triangular(blk.chol, u, lower=True, check_finite=False)
            sides.append((a, np.where(safe, shift, -np.inf)))
        return sides, ang

    def _pair_eval(self, z, w, zw_power: float, ww_power: float):
        """Pairwise kernel values as (log_scale, complex mantissa) arrays."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        shape = z.shape
        z, w = np.atleast_1d(z), np.atleast_1d(w)
        zf, wf = z.ravel(), w.ravel()
        sides_z, ang_z = self._side(zf, zw_power)
        sides_w, ang_w = self._side(wf, ww_power)
        nb, npts = len(sides_z), zf.size
        logs = np.full((nb, npts), -np.inf)
        vals = np.zeros((nb, npts), dtype=complex)
        for i, blk in enumerate(self.factorization.blocks):
            az, sz = sides_z[i]
            aw, sw = sides_w[i]
            inner = np.sum(az * aw, axis=0)
            logs[i] = sz + sw
            vals[i] = inner * np.exp(1j * blk.d * (ang_z - ang_w))
        top = np.max(logs, axis=0)
        top = np.where(np.isfinite(top), top, 0.0)
        mant = np.sum(vals * np.exp(logs - top[None, :]), axis=0)
        return top.reshape(shape), mant.reshape(shape)

    # -- public evaluation --------------------------------------------------

    def kernel(self, z, w):
        """Plain kernel value; may overflow doubles for large m Q."""
        scale, mant = self._pair_eval(z, w, 0.0, 0.0)
        out = mant * np.exp(scale)
        return out if out.shape else complex(out)

    def weighted_kernel(self, z, w):
        """Correlation kernel: weight factors e^{-mQ/2} folded per side."""
        scale, mant = self._pair_eval(z, w, 0.5, 0.5)
        out = mant * np.exp(scale)
        return out if out.shape else complex(out)

    def log_abs_weighted_kernel(self, z, w):
        """log |weighted kernel|; -inf where the value is an exact zero."""
        scale, mant = self._pair_eval(z, w, 0.5, 0.5)
        with np.errstate(divide="ignore"):
            out = scale + np.log(np.abs(mant))
        return out if out.shape else float(out)

    def one_point_intensity(self, z):
        """Expected point density K(z,z) e^{-mQ(z)} >= 0."""
        scale, mant = self._pair_eval(z, z, 0.5, 0.5)
        out = np.maximum(np.real(mant), 0.0) * np.exp(scale)
        return out if out.shape else float(out)

    def log_one_point_intensity(self, z):
        scale, mant = self._pair_eval(z, z, 0.5, 0.5)
        with np.errstate(divide="ignore"):
            out = scale + np.log(np.maximum(np.real(mant), 0.0))
        return out if out.shape else float(out)

    def _weighted_matrix(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).ravel()
        zz, ww = np.meshgrid(pts, pts, indexing="ij")
        scale, mant = self._pair_eval(zz, ww, 0.5, 0.5)
        return mant * np.exp(scale)

    def k_point_intensity(self, points) -> float:
        """Determinant of the weighted kernel matrix at the given points."""
        pts = np.asarray(points, dtype=complex).ravel()
        k = pts.size
        if not (1 <= k <= self.spec.dim):
            raise ConfigurationError(
                f"k-point intensity needs 1 <= k <= {self.spec.dim}, got {k}"
            )
        mat = self._weighted_matrix(pts)
        det = float(np.real(np.linalg.det(mat)))
        scale = float(np.prod(np.maximum(np.real(np.diag(mat)), 0.0)))
        if det < 0.0:
            if det < -NEGATIVE_DET_CLAMP * max(scale, 1e-300):
                warnings.warn(
                    f"{k}-point intensity determinant {det:.3e} is negative beyond "
                    f"roundoff (scale {scale:.3e}); clamping to 0",
                    stacklevel=2,
                )
            det = 0.0
        return det

    def joint_density(self, points) -> float:
        """Symmetric density of the full nq-point configuration."""
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size != self.spec.dim:
            raise ConfigurationError(
                f"joint density needs exactly {self.spec.dim} points, got {pts.size}"
            )
        mat = self._weighted_matrix(pts)
        sign, logabs = np.linalg.slogdet(mat)
        if not np.isfinite(logabs) or np.real(sign) <= 0.0:
            return 0.0
        return float(np.real(sign) * np.exp(logabs - gammaln(self.spec.dim + 1)))

    def berezin_density(self, z, w):
        """Probability density |K(w,z)|^2 e^{-mQ(w)} / K(z,z) centred at z."""
        log_gamma = self.log_one_point_intensity(z)
        if not np.all(np.isfinite(np.atleast_1d(log_gamma))):
            raise NumericalDegeneracyError(
                f"berezin centre z={z} has vanishing diagonal kernel"
            )
        log_k = self.log_abs_weighted_kernel(w, z)
        out = np.exp(2.0 * np.asarray(log_k) - log_gamma)
        return out if out.shape else float(out)

    def reproducing_residual(self, z: complex, n_r: int | None = None,
                             n_phi: int | None = None) -> float:
        """Worst basis-monomial reproduction defect at the probe point.

        max over basis monomials phi of
        | int phi(w) K(z,w) e^{-mQ(w)} dA(w) - phi(z) | / (1 + |phi(z)|),
        quadrature on the disk of radius R + 10 m^{-1/2}.
        """
        q, n, m = self.spec.q, self.spec.n, self.spec.m
        deg = n + q
        n_r = n_r or max(128, 3 * deg)
        n_phi = n_phi or max(64, 2 * deg + 16)
        r_max = self.equilibrium.droplet_radius + 10.0 / math.sqrt(m)
        x, v = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * r_max * (x + 1.0)
        wr = 0.5 * r_max * v
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        wgrid = (r[:, None] * np.exp(1j * phi[None, :])).ravel()
        # K(z, w) e^{-mQ(w)}: full damping on the w side keeps magnitudes sane
        scale, mant = self._pair_eval(np.full(wgrid.shape, z), wgrid, 0.0, 1.0)
        col = mant * np.exp(scale)
        area = np.repeat(wr * r, n_phi) * (2.0 / n_phi)
        worst = 0.0
        for rr in range(q):
            for jj in range(n):
                phi_w = np.conjugate(wgrid) ** rr * wgrid**jj
                phi_z = np.conjugate(z) ** rr * z**jj
                val = np.sum(area * phi_w * col)
                worst = max(worst, abs(val - phi_z) / (1.0 + abs(phi_z)))
        return float(worst)

    def total_intensity(self, n_r: int = 400, n_phi: int = 64) -> float:
        """Quadrature of the one-point intensity; equals nq by orthonormality."""
        r_max = self.equilibrium.droplet_radius + 12.0 / math.sqrt(self.spec.m)
        return integrate_polar_grid(
            lambda zz: self.one_point_intensity(zz), r_max, n_r, n_phi
        )


def build_space(weight: WeightModel, spec: SpaceSpec) -> KernelEvaluator:
    """Assemble moments, blocks, and Cholesky factors for one space."""
    return KernelEvaluator(GramFactorization(weight, spec))


def export_kernel_grid_csv(path: str, evaluator: KernelEvaluator, z_points,
                           w_points) -> None:
    """Write kernel evaluations as CSV rows in full double precision."""
    z = np.asarray(z_points, dtype=complex).ravel()
    w = np.asarray(w_points, dtype=complex).ravel()
    z, w = np.broadcast_arrays(z, w)
    plain = np.atleast_1d(evaluator.kernel(z, w))
    wabs = np.exp(np.atleast_1d(evaluator.log_abs_weighted_kernel(z, w)))
    g = lambda x: format(float(x), ".17g")
    lines = ["re_z,im_z,re_w,im_w,re_K,im_K,weighted_abs"]
    for i in range(z.size):
        lines.append(",".join([
            g(z[i].real), g(z[i].imag), g(w[i].real), g(w[i].imag),
            g(plain[i].real), g(plain[i].imag), g(wabs[i]),
        ]))
    from .reporting import atomic_write_text

    atomic_write_text(path, "\n".join(lines) + "\n")
