"""Command-line front end: every computation as a subcommand emitting CSV/JSON.

Exit codes: 0 success, 1 configuration error, 2 numerical degeneracy.
POLYKERNEL_THREADS caps internal parallelism (sampling workers).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import asymptotics as asym
from .errors import ConfigurationError, NumericalDegeneracyError
from .kernel import SpaceSpec, build_space, export_kernel_grid_csv
from .localexpansion import local_kernel_leading, local_kernel_q1, local_kernel_q2
from .reporting import atomic_write_text, format_float, json_dumps, write_csv
from .sampling import empirical_intensity, export_configuration, sample_batch
from .weights import RadialEquilibrium, parse_weight


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config errors are exit 1
        raise ConfigurationError(message)


def _threads() -> int:
    raw = os.environ.get("POLYKERNEL_THREADS", "")
    if not raw:
        return os.cpu_count() or 1
    try:
        val = int(raw)
    except ValueError:
        raise ConfigurationError(f"POLYKERNEL_THREADS must be an integer, got '{raw}'")
    return max(1, val)


def _complex_flag(text: str, flag: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigurationError(f"invalid complex number for {flag}: '{text}'")


def _m_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise ConfigurationError(f"invalid --m list '{text}'")


def _add_space_flags(p: argparse.ArgumentParser, with_n: bool = True):
    p.add_argument("--weight", required=True,
                   help="weight string: ginibre | power:p=<int> | radialpoly:c=<floats>")
    p.add_argument("--q", type=int, default=1, help="polyanalytic order (q >= 1)")
    if with_n:
        p.add_argument("--n", type=int, required=True, help="analytic degree count")
        p.add_argument("--m", type=float, required=True, help="scaling parameter")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="polykernel",
                  description="Weighted polyanalytic polynomial kernels, their "
                              "determinantal point processes, and bulk-limit checks.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("droplet", parents=[], help="droplet radius R solving "
                       "R*Q'(R)=2 and the equilibrium-potential profile")
    p.add_argument("--weight", required=True)
    p.add_argument("--out", help="optional CSV of r, Q(r), equilibrium potential")
    p.add_argument("--r-max", type=float, default=0.0)
    p.add_argument("--n-grid", type=int, default=200)

    p = sub.add_parser("energy", help="weighted logarithmic energy of the "
                       "equilibrium measure")
    p.add_argument("--weight", required=True)
    p.add_argument("--n-quad", type=int, default=512)

    p = sub.add_parser("kernel", help="grid of kernel values around a centre, "
                       "CSV with plain and weighted magnitudes")
    _add_space_flags(p)
    p.add_argument("--w0", default="0", help="fixed second argument (complex)")
    p.add_argument("--center", default="0", help="grid centre (complex)")
    p.add_argument("--grid-radius", type=float, default=1.0)
    p.add_argument("--grid-n", type=int, default=17)
    p.add_argument("--out", required=True)

    p = sub.add_parser("berezin", help="normalized squared weighted kernel "
                       "density around a centre")
    _add_space_flags(p)
    p.add_argument("--z0", default="0", help="centre (complex)")
    p.add_argument("--grid-radius", type=float, default=1.0)
    p.add_argument("--grid-n", type=int, default=33)
    p.add_argument("--out", required=True)

    p = sub.add_parser("intensity", help="radial profile of the one-point intensity")
    _add_space_flags(p)
    p.add_argument("--r-max", type=float, default=0.0)
    p.add_argument("--n-grid", type=int, default=200)
    p.add_argument("--out", required=True)

    p = sub.add_parser("blowup", help="rescaled bulk kernel against the "
                       "Laguerre profile over an m ladder, with rate fit")
    p.add_argument("--weight", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--z0", default="0")
    p.add_argument("--m", required=True, help="comma-separated m ladder")
    p.add_argument("--n", default="", help="optional comma-separated n per m (default n=m)")
    p.add_argument("--grid-radius", type=float, default=2.5)
    p.add_argument("--grid-n", type=int, default=17)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-prefix", default="", help="optional per-m error-grid CSVs")

    p = sub.add_parser("decay", help="off-diagonal decay scans of the weighted "
                       "kernel over an m ladder")
    p.add_argument("--weight", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--z0", default="0")
    p.add_argument("--m", required=True)
    p.add_argument("--directions", type=int, default=4)
    p.add_argument("--separations", type=int, default=12)
    p.add_argument("--out", required=True)

    p = sub.add_parser("offdroplet", help="outside-droplet decay margins along a ray")
    _add_space_flags(p)
    p.add_argument("--ratios", default="1.1,1.2,1.35,1.5,1.75,2.0",
                   help="radii as multiples of the droplet radius")
    p.add_argument("--direction", default="1")
    p.add_argument("--out", required=True)

    p = sub.add_parser("local", help="near-diagonal expansion values on a grid")
    p.add_argument("--weight", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--z0", default="0.5")
    p.add_argument("--terms", type=int, default=2)
    p.add_argument("--grid-radius", type=float, default=0.2)
    p.add_argument("--grid-n", type=int, default=17)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="exact determinantal configurations, "
                       "CSV per configuration plus JSON sidecar")
    _add_space_flags(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("selftest", help="run the structural invariant suite "
                       "on a small space matrix")
    p.add_argument("--fast", action="store_true")

    return top


def _resolve_space(args):
    weight = parse_weight(args.weight)
    if args.q < 1:
        raise ConfigurationError(f"--q must be >= 1, got {args.q}")
    spec = SpaceSpec(args.q, args.n, args.m)
    return weight, spec


def cmd_droplet(args) -> int:
    weight = parse_weight(args.weight)
    eq = RadialEquilibrium.solve(weight)
    print(f"R = {eq.droplet_radius:.12f}")
    if args.out:
        r_max = args.r_max or 2.5 * eq.droplet_radius
        r = np.linspace(0.0, r_max, args.n_grid)
        write_csv(args.out, ["r", "Q", "equilibrium_potential"],
                  zip(r, np.atleast_1d(weight.eval_weight(r)),
                      np.atleast_1d(eq.equilibrium_potential(r))))
    return 0


def cmd_energy(args) -> int:
    weight = parse_weight(args.weight)
    eq = RadialEquilibrium.solve(weight)
    print(f"I = {eq.weighted_energy(args.n_quad):.12f}")
    return 0


def _square_grid(center: complex, radius: float, n: int) -> np.ndarray:
    side = np.linspace(-radius, radius, n)
    return center + side[:, None] + 1j * side[None, :]


def cmd_kernel(args) -> int:
    weight, spec = _resolve_space(args)
    K = build_space(weight, spec)
    z = _square_grid(_complex_flag(args.center, "--center"), args.grid_radius,
                     args.grid_n).ravel()
    w0 = _complex_flag(args.w0, "--w0")
    export_kernel_grid_csv(args.out, K, z, np.full_like(z, w0))
    print(f"wrote {z.size} kernel rows to {args.out}")
    return 0


def cmd_berezin(args) -> int:
    weight, spec = _resolve_space(args)
    K = build_space(weight, spec)
    z0 = _complex_flag(args.z0, "--z0")
    grid = _square_grid(z0, args.grid_radius, args.grid_n).ravel()
    dens = np.atleast_1d(K.berezin_density(z0, grid))
    write_csv(args.out, ["re_w", "im_w", "berezin"],
              zip(grid.real, grid.imag, dens))
    print(f"wrote {grid.size} berezin rows to {args.out}")
    return 0


def cmd_intensity(args) -> int:
    weight, spec = _resolve_space(args)
    K = build_space(weight, spec)
    r_max = args.r_max or K.equilibrium.droplet_radius + 8.0 / math.sqrt(spec.m)
    r = np.linspace(0.0, r_max, args.n_grid)
    gamma = np.atleast_1d(K.one_point_intensity(r.astype(complex)))
    write_csv(args.out, ["r", "gamma1"], zip(r, gamma))
    print(f"wrote {r.size} intensity rows to {args.out}")
    return 0


def cmd_blowup(args) -> int:
    weight = parse_weight(args.weight)
    ms = _m_list(args.m)
    if args.n:
        ns = [int(tok) for tok in args.n.split(",")]
        if len(ns) != len(ms):
            raise ConfigurationError("--n list must match --m list length")
        n_of_m = lambda mm: ns[ms.index(mm)]
    else:
        n_of_m = None
    report = asym.blowup_ladder(weight, args.q, _complex_flag(args.z0, "--z0"),
                                ms, n_of_m=n_of_m, grid_radius=args.grid_radius,
                                grid_n=args.grid_n)
    atomic_write_text(args.out, json_dumps(report.to_dict()) + "\n")
    if args.csv_prefix:
        for res in report.results:
            write_csv(f"{args.csv_prefix}-m{res.m:g}.csv",
                      ["re_xi", "im_xi", "re_lambda", "im_lambda", "error"],
                      zip(res.xi.real, res.xi.imag, res.lam.real, res.lam.imag,
                          res.errors))
    print(f"slope = {report.slope:.6f} (sup errors: "
          + ", ".join(format_float(e) for e in report.sup_errors) + ")")
    return 0


def cmd_decay(args) -> int:
    weight = parse_weight(args.weight)
    report = asym.decay_ladder(weight, args.q, _complex_flag(args.z0, "--z0"),
                               _m_list(args.m), n_directions=args.directions,
                               n_separations=args.separations)
    atomic_write_text(args.out, json_dumps(report.to_dict()) + "\n")
    ratios = ", ".join(format_float(s.beta_over_sqrt_m) for s in report.scans)
    print(f"beta/sqrt(m) = [{ratios}], stability = {report.stability:.3f}")
    return 0


def cmd_offdroplet(args) -> int:
    weight, spec = _resolve_space(args)
    K = build_space(weight, spec)
    R = K.equilibrium.droplet_radius
    try:
        ratios = [float(tok) for tok in args.ratios.split(",") if tok]
    except ValueError:
        raise ConfigurationError(f"invalid --ratios list '{args.ratios}'")
    radii = np.array(ratios) * R
    margins = asym.offdroplet_margins(K, _complex_flag(args.direction, "--direction"),
                                      radii)
    write_csv(args.out, ["r", "r_over_R", "margin"], zip(radii, ratios, margins))
    print(f"max margin = {margins.max():.6f}")
    return 0


def cmd_local(args) -> int:
    weight = parse_weight(args.weight)
    z0 = _complex_flag(args.z0, "--z0")
    grid = _square_grid(z0, args.grid_radius, args.grid_n).ravel()
    if args.q == 1:
        if args.terms not in (1, 2):
            raise ConfigurationError("--terms must be 1 or 2 for q=1")
        vals = local_kernel_q1(weight, args.m, np.full_like(grid, z0), grid,
                               terms=args.terms, weighted=args.weighted)
    elif args.q == 2:
        if args.terms not in (1, 2, 3):
            raise ConfigurationError("--terms must be 1..3 for q=2")
        vals = local_kernel_q2(weight, args.m, np.full_like(grid, z0), grid,
                               terms=args.terms, weighted=args.weighted)
    else:
        vals = local_kernel_leading(weight, args.q, args.m,
                                    np.full_like(grid, z0), grid,
                                    weighted=args.weighted)
    vals = np.atleast_1d(vals)
    write_csv(args.out, ["re_w", "im_w", "re_value", "im_value", "abs_value"],
              zip(grid.real, grid.imag, vals.real, vals.imag, np.abs(vals)))
    print(f"wrote {grid.size} local-expansion rows to {args.out}")
    return 0


def cmd_sample(args) -> int:
    weight, spec = _resolve_space(args)
    if args.count < 1:
        raise ConfigurationError(f"--count must be >= 1, got {args.count}")
    K = build_space(weight, spec)
    configs = sample_batch(K, args.count, args.seed, workers=_threads())
    os.makedirs(args.outdir, exist_ok=True)
    for i, cfg in enumerate(configs):
        base = os.path.join(args.outdir, f"config-{i:04d}")
        export_configuration(base + ".csv", base + ".json", cfg)
    print(f"wrote {len(configs)} configurations to {args.outdir}")
    return 0


def cmd_selftest(args) -> int:
    specs = [("ginibre", 1), ("ginibre", 2)] if args.fast else \
        [("ginibre", 1), ("ginibre", 2), ("power:p=2", 1), ("power:p=2", 2)]
    nm = 12 if args.fast else 20
    failures = 0
    for wtext, q in specs:
        weight = parse_weight(wtext)
        K = build_space(weight, SpaceSpec(q, nm, float(nm)))
        checks = {
            "trace": abs(K.total_intensity() - q * nm) < 1e-6,
            "hermitian": _hermitian_ok(K),
            "berezin_mass": _berezin_mass_ok(K),
            "reproducing": K.reproducing_residual(0.3 + 0.1j) < 1e-7,
        }
        if q == 2:
            checks["diagonal_bound"] = asym.diagonal_bound_check(K) < 1.0
        for name, ok in checks.items():
            tag = "PASS" if ok else "FAIL"
            print(f"[{tag}] {wtext} q={q} n=m={nm}: {name}")
            failures += 0 if ok else 1
    if failures:
        raise NumericalDegeneracyError(f"selftest: {failures} checks failed")
    print("selftest: all checks passed")
    return 0


def _hermitian_ok(K) -> bool:
    rng = np.random.default_rng(7)
    R = K.equilibrium.droplet_radius
    z = R * (rng.random(50) + 1j * rng.random(50) - 0.5 - 0.5j)
    w = R * (rng.random(50) + 1j * rng.random(50) - 0.5 - 0.5j)
    a = np.atleast_1d(K.weighted_kernel(z, w))
    b = np.atleast_1d(K.weighted_kernel(w, z))
    return bool(np.max(np.abs(a - np.conj(b)) / np.maximum(np.abs(a), 1e-30)) < 1e-10)


def _berezin_mass_ok(K) -> bool:
    from .quadrature import integrate_polar_grid

    r_max = K.equilibrium.droplet_radius + 12.0 / math.sqrt(K.spec.m)
    mass = integrate_polar_grid(lambda zz: K.berezin_density(0.2 + 0.1j, zz),
                                r_max, 320, 64)
    return abs(mass - 1.0) < 1e-6


_DISPATCH = {
    "droplet": cmd_droplet,
    "energy": cmd_energy,
    "kernel": cmd_kernel,
    "berezin": cmd_berezin,
    "intensity": cmd_intensity,
    "blowup": cmd_blowup,
    "decay": cmd_decay,
    "offdroplet": cmd_offdroplet,
    "local": cmd_local,
    "sample": cmd_sample,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _DISPATCH[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericalDegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
