"""Command-line surface: solve, energy, diagnose, kernel-table, kernel-verify,
radial-table.

Exit codes: 0 success, 1 validation error (bad flags, bad files, unsupported
family/command combinations), 2 numerical failure (quadrature or optimizer
non-convergence, verification tolerances exceeded).  Stochastic commands
require an explicit --seed; with the same inputs and seed the outputs are
byte-identical in serial mode.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .diagnostics import diagnostics_report
from .energy import energy, energy_gradient, separation
from .geometry import (
    Configuration,
    Family,
    Manifold,
    UnsupportedOperationError,
    manifold,
    random_point,
    retract,
)
from .kernel import KernelBuildError
from .optimize import OptimizeOptions, OptimizerError, mix_seed, multi_start
from .quadrature import QuadratureError
from .radial import (
    ball_volume_fraction,
    radial_geometry,
    radial_laplacian,
    tail,
    total_volume,
    v,
)
from .serialization import (
    SchemaError,
    diagnostics_report_to_obj,
    dump_json,
    energy_report_to_obj,
    format_float,
    load_configuration,
    save_configuration,
    write_text_atomic,
)

__all__ = ["run", "main", "RunConfig"]

COMMANDS = ("solve", "energy", "diagnose", "kernel-table", "kernel-verify", "radial-table")
KERNELS = ("green", "log", "riesz")


class _CliValidation(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _CliValidation(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    command: str
    family: str | None = None
    n: int | None = None
    kernel: str | None = None
    s: float | None = None
    N: int | None = None
    seed: int | None = None
    starts: int = 8
    trials: int = 10000
    points: int = 512
    max_iters: int = 5000
    grad_tol: float = 1e-8
    threads: int = 1
    perturb: bool = False
    potential_samples: int = 100000
    potential_points: int = 3
    config: str | None = None
    out: str | None = None
    trace: str | None = None
    format: str = "json"


_PARAM_FIELDS = set(RunConfig.__dataclass_fields__) - {"command"}


def _build_parser() -> _Parser:
    parser = _Parser(prog="greenpoints", description=__doc__)
    parser.add_argument("--version", action="version", version=f"greenpoints {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="|".join(COMMANDS))

    def add_common(p, *names):
        if "family" in names:
            p.add_argument("--family", type=str, help="S, RP, CP, HP or OP2")
            p.add_argument("--n", type=int, help="family parameter (e.g. 3 for CP^3)")
        if "kernel" in names:
            p.add_argument("--kernel", type=str, choices=KERNELS)
            p.add_argument("--s", type=float, help="Riesz exponent (riesz kernel only)")
        if "seed" in names:
            p.add_argument("--seed", type=int, help="mandatory RNG seed")
        if "out" in names:
            p.add_argument("--out", type=str, help="output path (atomic write)")
        p.add_argument("--params", type=str, help="JSON file with defaults for these flags")

    p_solve = sub.add_parser("solve", description="Minimize the discrete energy from random starts.")
    add_common(p_solve, "family", "kernel", "seed", "out")
    p_solve.add_argument("--N", type=int, help="number of points")
    p_solve.add_argument("--starts", type=int)
    p_solve.add_argument("--max-iters", dest="max_iters", type=int)
    p_solve.add_argument("--grad-tol", dest="grad_tol", type=float)
    p_solve.add_argument("--threads", type=int)
    p_solve.add_argument("--perturb", action="store_true", default=None)
    p_solve.add_argument("--trace", type=str, help="write per-iteration CSV trace here")

    p_energy = sub.add_parser("energy", description="Score a configuration file.")
    add_common(p_energy, "kernel", "out")
    p_energy.add_argument("--config", type=str, help="configuration JSON path")

    p_diag = sub.add_parser("diagnose", description="Equidistribution diagnostics for a configuration.")
    add_common(p_diag, "kernel", "seed", "out")
    p_diag.add_argument("--config", type=str)
    p_diag.add_argument("--trials", type=int)
    p_diag.add_argument("--potential-samples", dest="potential_samples", type=int)
    p_diag.add_argument("--potential-points", dest="potential_points", type=int)

    p_kt = sub.add_parser("kernel-table", description="Tabulate phi, phi', singular part as CSV.")
    add_common(p_kt, "family", "out")
    p_kt.add_argument("--points", type=int)

    p_kv = sub.add_parser("kernel-verify", description="Check the built kernel against closed forms and invariants.")
    add_common(p_kv, "family")

    p_rt = sub.add_parser("radial-table", description="Tabulate r, v, tail, L, cdf as CSV.")
    add_common(p_rt, "family", "out")
    p_rt.add_argument("--points", type=int)

    return parser


def _merge_params(args: argparse.Namespace) -> RunConfig:
    values = {}
    params_path = getattr(args, "params", None)
    if params_path:
        try:
            with open(params_path) as fh:
                loaded = json.load(fh)
        except FileNotFoundError:
            raise _CliValidation(f"params file not found: {params_path}")
        except json.JSONDecodeError as exc:
            raise _CliValidation(f"params file {params_path} is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise _CliValidation(f"params file {params_path} must hold a JSON object")
        for key, val in loaded.items():
            attr = key.replace("-", "_")
            if attr not in _PARAM_FIELDS:
                raise _CliValidation(f"params.{key}: unknown parameter")
            values[attr] = val
    for attr in _PARAM_FIELDS:
        cli_val = getattr(args, attr, None)
        if cli_val is not None:
            values[attr] = cli_val
    try:
        return RunConfig(command=args.command, **values)
    except TypeError as exc:
        raise _CliValidation(str(exc))


def _require(cfg: RunConfig, *fields: str):
    for name in fields:
        if getattr(cfg, name) is None:
            raise _CliValidation(
                f"'{cfg.command}' requires --{name.replace('_', '-')} (or the params file)"
            )


def _resolve_manifold(cfg: RunConfig) -> Manifold:
    _require(cfg, "family")
    n = cfg.n
    if cfg.family.upper() == "OP2" and n is None:
        n = 2
    if n is None:
        raise _CliValidation(f"'{cfg.command}' requires --n for family {cfg.family}")
    return manifold(cfg.family, n)


def _resolve_evaluator(cfg: RunConfig, m: Manifold):
    from . import kernel as kn

    _require(cfg, "kernel")
    if cfg.kernel == "green":
        return kn.green_evaluator(m)
    if cfg.kernel == "log":
        return kn.log_evaluator(m)
    if cfg.kernel == "riesz":
        if cfg.s is None:
            raise _CliValidation("the riesz kernel requires --s > 0")
        return kn.riesz_evaluator(m, cfg.s)
    raise _CliValidation(f"unknown kernel {cfg.kernel!r}")


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        write_text_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def _interior_grid(D: float, count: int) -> np.ndarray:
    if count < 2:
        raise _CliValidation("--points must be at least 2")
    return D * (np.arange(1, count + 1)) / (count + 1)


# ----------------------------------------------------------------------------
# Commands.


def _cmd_solve(cfg: RunConfig) -> int:
    _require(cfg, "N", "seed")
    m = _resolve_manifold(cfg)
    if not m.supports_points:
        raise _CliValidation("solve is unavailable on OP2 (radial queries only)")
    evaluator = _resolve_evaluator(cfg, m)
    opts = OptimizeOptions(
        max_iters=cfg.max_iters,
        grad_tol=cfg.grad_tol,
        starts=cfg.starts,
        seed=cfg.seed,
        perturbation=cfg.perturb,
    )
    result = multi_start(m, cfg.N, evaluator, opts, workers=cfg.threads)
    if cfg.out:
        save_configuration(cfg.out, result.config)
    if cfg.trace and result.trace is not None:
        lines = ["iteration,energy,grad_norm"]
        lines += [
            f"{it},{format_float(e)},{format_float(gn)}" for it, e, gn in result.trace
        ]
        write_text_atomic(cfg.trace, "\n".join(lines) + "\n")
    report = {
        "command": "solve",
        "manifold": {"family": m.family.value, "n": m.n},
        "kernel": cfg.kernel if cfg.kernel != "riesz" else f"riesz:{cfg.s}",
        "N": cfg.N,
        "seed": cfg.seed,
        "starts": cfg.starts,
        "energy": result.energy,
        "scaled_energy": result.energy / (cfg.N * cfg.N),
        "grad_norm": result.grad_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "separation": separation(result.config),
        "degenerate_pair_events": result.degenerate_pair_events,
    }
    sys.stdout.write(dump_json(report))
    return 0


def _cmd_energy(cfg: RunConfig) -> int:
    _require(cfg, "config")
    config = load_configuration(cfg.config)
    evaluator = _resolve_evaluator(cfg, config.manifold)
    report = energy(config, evaluator)
    _emit(cfg, dump_json(energy_report_to_obj(report)))
    return 0


def _cmd_diagnose(cfg: RunConfig) -> int:
    _require(cfg, "config", "seed")
    config = load_configuration(cfg.config)
    evaluator = _resolve_evaluator(cfg, config.manifold)
    report = diagnostics_report(
        config,
        evaluator,
        trials=cfg.trials,
        seed=cfg.seed,
        potential_points=cfg.potential_points,
        potential_samples=cfg.potential_samples,
    )
    _emit(cfg, dump_json(diagnostics_report_to_obj(report)))
    return 0


def _cmd_kernel_table(cfg: RunConfig) -> int:
    from . import kernel as kn

    m = _resolve_manifold(cfg)
    evaluator = kn.green_evaluator(m)
    grid = _interior_grid(m.diameter, cfg.points)
    lines = ["r,phi,phi_prime,singular_part"]
    phi_vals = evaluator.phi(grid)
    dphi_vals = evaluator.phi_prime(grid)
    sing_vals = evaluator.singular(grid)
    for r, p_, dp_, s_ in zip(grid, phi_vals, dphi_vals, sing_vals):
        lines.append(
            f"{format_float(r)},{format_float(p_)},{format_float(dp_)},{format_float(s_)}"
        )
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def _cmd_radial_table(cfg: RunConfig) -> int:
    m = _resolve_manifold(cfg)
    grid = _interior_grid(m.diameter, cfg.points)
    lines = ["r,v,tail,L,cdf"]
    for r in grid:
        lines.append(
            ",".join(
                format_float(x)
                for x in (
                    r,
                    v(m, float(r)),
                    tail(m, float(r)),
                    radial_laplacian(m, float(r)),
                    ball_volume_fraction(m, float(r)),
                )
            )
        )
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def _gradient_fd_deviation(m: Manifold, evaluator, seed: int, h: float = 1e-6) -> float:
    """Directional derivative vs central differences on a random 8-point set."""
    rng = np.random.default_rng(mix_seed(seed, 0xFD))
    points = [random_point(m, rng) for _ in range(8)]
    config = Configuration(m, tuple(points))
    grads, _ = energy_gradient(config, evaluator)
    worst = 0.0
    for idx, p in enumerate(points):
        raw = rng.standard_normal(m.ambient_real_dim)
        from .geometry import project_tangent

        vdir = project_tangent(p, raw)
        nrm = vdir.norm
        if nrm < 1e-12:
            continue
        vhat = vdir.ambient / nrm
        analytic = float(np.dot(grads[idx].ambient, vhat))
        from .energy import energy as _energy
        from .geometry import TangentVector

        plus = list(points)
        minus = list(points)
        plus[idx] = retract(m, p, TangentVector(p, h * vhat))
        minus[idx] = retract(m, p, TangentVector(p, -h * vhat))
        e_plus = _energy(Configuration(m, tuple(plus)), evaluator).total
        e_minus = _energy(Configuration(m, tuple(minus)), evaluator).total
        numeric = (e_plus - e_minus) / (2.0 * h)
        worst = max(worst, abs(analytic - numeric))
    return worst


def _cmd_kernel_verify(cfg: RunConfig) -> int:
    from . import kernel as kn

    m = _resolve_manifold(cfg)
    evaluator = kn.green_evaluator(m)
    geo = radial_geometry(m)
    D = m.diameter
    d = m.real_dim
    checks: list[tuple[str, float, float]] = []

    from .quadrature import integrate_singular_left

    V = total_volume(m)
    zero_mean = abs(
        integrate_singular_left(
            lambda r: float(evaluator.phi(r)) * v(m, r), 1e-10, D, log_singularity=True
        )
        / V
    )
    checks.append(("zero-mean |(1/V) int phi v|", zero_mean, 1e-9))

    r_probe = 1e-3
    lim = r_probe ** (d - 1) * kn.phi_prime(m, r_probe)
    checks.append(
        ("singular amplitude rel err of r^(d-1) phi' vs -1/lim(v/r^(d-1))",
         abs(lim + 1.0 / geo.kappa) * geo.kappa, 1e-3)
    )

    if geo.profile.cos_exponent > 0 or m.family is Family.SPHERE:
        flat = abs(kn.phi_prime(m, D - 1e-4)) / abs(kn.phi_prime(m, D / 2))
        checks.append(("endpoint flatness |phi'(D-1e-4)| / |phi'(D/2)|", flat, 1e-2))

    if m.family is Family.SPHERE and m.n == 2:
        rr = np.linspace(0.01, math.pi - 0.01, 2000)
        closed = -np.log(np.sin(0.5 * rr)) / (2 * math.pi) - 1 / (4 * math.pi)
        checks.append(
            ("closed form max |phi - phi_closed|",
             float(np.max(np.abs(evaluator.phi(rr) - closed))), 1e-9)
        )
        affine = evaluator.phi(rr) + np.log(2 * np.sin(0.5 * rr)) / (2 * math.pi)
        expected = (2 * math.log(2) - 1) / (4 * math.pi)
        checks.append(
            ("green-log affine constant deviation",
             float(np.max(np.abs(affine - expected))), 1e-9)
        )

    if m.family is Family.COMPLEX_PROJECTIVE and m.n in (3, 4):
        closed = kn.closed_form_cp3() if m.n == 3 else kn.closed_form_cp4()
        rr = np.linspace(0.05, math.pi / 2 - 0.05, 2000)
        anchor = math.pi / 4
        dev = np.abs(
            (evaluator.phi(rr) - evaluator.phi(anchor))
            - (closed.phi(rr) - closed.phi(anchor))
        )
        checks.append(("closed form (differences)", float(np.max(dev)), 1e-8))

    if m.family is Family.SPHERE:
        r_pair = (1.0, 2.0)
        t_pair = tuple(2.0 * math.sin(0.5 * r) for r in r_pair)
        lhs = kn.phi_sn_euclidean_check(m.n, t_pair[0]) - kn.phi_sn_euclidean_check(
            m.n, t_pair[1]
        )
        rhs = float(evaluator.phi(r_pair[0]) - evaluator.phi(r_pair[1]))
        checks.append(("Euclidean-form difference", abs(lhs - rhs), 1e-6))

    if m.supports_points:
        fd_dev = _gradient_fd_deviation(m, evaluator, seed=cfg.seed or 20260810)
        checks.append(("gradient central-difference max deviation", fd_dev, 1e-5))

    all_pass = True
    for name, value, tol in checks:
        ok = value <= tol
        all_pass &= ok
        sys.stdout.write(
            f"{'PASS' if ok else 'FAIL'} {m.label} {name}: {value:.3e} (tol {tol:.0e})\n"
        )
    return 0 if all_pass else 2


_HANDLERS = {
    "solve": _cmd_solve,
    "energy": _cmd_energy,
    "diagnose": _cmd_diagnose,
    "kernel-table": _cmd_kernel_table,
    "kernel-verify": _cmd_kernel_verify,
    "radial-table": _cmd_radial_table,
}


def run(argv: list[str]) -> int:
    """Parse and execute one CLI invocation; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _CliValidation(
                "missing command; expected one of " + ", ".join(COMMANDS)
            )
        cfg = _merge_params(args)
        return _HANDLERS[cfg.command](cfg)
    except (_CliValidation, SchemaError, UnsupportedOperationError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: file not found: {exc.filename or exc}\n")
        return 1
    except (QuadratureError, KernelBuildError, OptimizerError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
