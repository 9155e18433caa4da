"""Riemannian gradient descent with Armijo backtracking and multi-start.

Descent along the negative gradient with the normalize-and-regauge
retraction is enough at desk scale: the kernel singularity repels merging
points and the line search rejects any step that would cross the
coincidence cutoff, so a run can never reach a singular configuration.
Trial step lengths follow Barzilai-Borwein, but every accepted step still
passes the Armijo test, so the energy trace is strictly nonincreasing.
Multi-start draws deterministic per-run seeds from ``opts.seed`` through a
fixed 64-bit mixer, and the best-of reduction is ordered by run index, so
results are reproducible bit-for-bit regardless of how many workers execute
the runs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .energy import DEFAULT_DELTA_MIN, _gradient_raw, _neumaier_sum, _potentials_raw
from .energy import SingularConfigurationError
from .geometry import (
    Configuration,
    Manifold,
    configuration_from_matrix,
    random_point,
)
from .kernel import KernelEvaluator

__all__ = [
    "OptimizeOptions",
    "OptimizeResult",
    "OptimizerError",
    "minimize",
    "multi_start",
]

_MASK64 = (1 << 64) - 1
_PERTURB_SALT = 0x5DEECE66D
_STEP_GROWTH_CAP = 1e6


class OptimizerError(RuntimeError):
    """All multi-start runs failed."""


@dataclass(frozen=True)
class OptimizeOptions:
    max_iters: int = 5000
    grad_tol: float = 1e-8             # sup-norm over per-point gradients
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 0.1
    min_step: float = 1e-14
    starts: int = 8
    seed: int = 0
    perturbation: bool = False         # monotone tangent perturbation, N >= 50
    perturbation_sigma: float = 0.05
    record_trace: bool = True

    def __post_init__(self):
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.grad_tol <= 0 or self.initial_step <= 0 or self.min_step <= 0:
            raise ValueError("tolerances and steps must be positive")
        if self.max_iters < 1 or self.starts < 1:
            raise ValueError("max_iters and starts must be >= 1")


@dataclass(frozen=True)
class OptimizeResult:
    config: Configuration
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    trace: tuple[tuple[int, float, float], ...] | None
    degenerate_pair_events: int


def mix_seed(seed: int, k: int = 0) -> int:
    """Fixed 64-bit mixer (splitmix64 finalizer) for per-run seed derivation."""
    z = (seed ^ k) & _MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=1)[:, None]


def _grad_sup(G: np.ndarray) -> float:
    return float(np.sqrt((G * G).sum(axis=1).max()))


def minimize(
    config0: Configuration,
    evaluator: KernelEvaluator,
    opts: OptimizeOptions,
    rng: np.random.Generator | None = None,
) -> OptimizeResult:
    """Descend from ``config0``; monotone in energy, stops at grad_tol.

    ``rng`` drives the optional tangent perturbation only; when omitted it
    is seeded from ``opts.seed``.
    """
    m = config0.manifold
    X = np.array(config0.matrix())
    N = X.shape[0]
    r_floor = 10.0 * evaluator.r_min

    P, dmin, i, j = _potentials_raw(X, m, evaluator)
    if dmin <= evaluator.r_min:
        raise SingularConfigurationError(
            f"starting configuration has coincident points {i}, {j}", (i, j)
        )
    E = _neumaier_sum(P)

    if rng is None:
        rng = np.random.default_rng(mix_seed(opts.seed, _PERTURB_SALT))
    perturb = opts.perturbation and N >= 50

    degenerate_events = 0
    G, ndeg, dmin, *_ = _gradient_raw(X, m, evaluator, DEFAULT_DELTA_MIN)
    degenerate_events += ndeg
    gsup = _grad_sup(G)
    trace = [(0, E, gsup)] if opts.record_trace else None

    eta = opts.initial_step
    iterations = 0
    converged = gsup <= opts.grad_tol
    X_prev = G_prev = None
    while not converged and iterations < opts.max_iters:
        gsq = float((G * G).sum())
        # Barzilai-Borwein trial step from the last accepted move, clamped;
        # Armijo backtracking below keeps every accepted step monotone.
        if X_prev is not None:
            s = X - X_prev
            y = G - G_prev
            sy = float((s * y).sum())
            if sy > 0.0:
                eta = float((s * s).sum()) / sy
            else:
                eta /= opts.backtrack_factor
        eta = min(max(eta, 16.0 * opts.min_step), _STEP_GROWTH_CAP * opts.initial_step)
        accepted = False
        while eta >= opts.min_step:
            Xc = _normalize_rows(X - eta * G)
            Pc, dmin_c, *_ = _potentials_raw(Xc, m, evaluator)
            if dmin_c > r_floor:
                Ec = _neumaier_sum(Pc)
                if Ec <= E - opts.armijo_c * eta * gsq:
                    accepted = True
                    break
            eta *= opts.backtrack_factor
        if not accepted:
            break
        X_prev, G_prev = X, G
        X, E = Xc, Ec
        iterations += 1

        if perturb:
            sigma = opts.perturbation_sigma / (1.0 + iterations)
            Xp = _normalize_rows(X + sigma * rng.standard_normal(X.shape))
            Pp, dmin_p, *_ = _potentials_raw(Xp, m, evaluator)
            if dmin_p > r_floor:
                Ep = _neumaier_sum(Pp)
                if Ep < E:
                    X, E = Xp, Ep

        G, ndeg, dmin, *_ = _gradient_raw(X, m, evaluator, DEFAULT_DELTA_MIN)
        degenerate_events += ndeg
        gsup = _grad_sup(G)
        if opts.record_trace:
            trace.append((iterations, E, gsup))
        converged = gsup <= opts.grad_tol

    # Canonicalize and recompute so the reported energy matches the reported
    # configuration exactly.
    final = configuration_from_matrix(m, X, canonicalize_points=True)
    Xf = final.matrix()
    Pf, dmin_f, *_ = _potentials_raw(Xf, m, evaluator)
    Ef = _neumaier_sum(Pf)
    Gf, _, _, *_ = _gradient_raw(Xf, m, evaluator, DEFAULT_DELTA_MIN)
    gsup_f = _grad_sup(Gf)
    return OptimizeResult(
        config=final,
        energy=Ef,
        grad_norm=gsup_f,
        iterations=iterations,
        converged=gsup_f <= opts.grad_tol,
        trace=tuple(trace) if trace is not None else None,
        degenerate_pair_events=degenerate_events,
    )


def _random_configuration(m: Manifold, N: int, rng: np.random.Generator) -> Configuration:
    return Configuration(m, tuple(random_point(m, rng) for _ in range(N)))


def _one_start(m, N, evaluator, opts, k):
    run_seed = mix_seed(opts.seed, k)
    rng = np.random.default_rng(run_seed)
    config0 = _random_configuration(m, N, rng)
    return minimize(config0, evaluator, opts, rng=rng)


def multi_start(
    m: Manifold,
    N: int,
    evaluator: KernelEvaluator,
    opts: OptimizeOptions,
    rng: np.random.Generator | None = None,
    workers: int = 1,
) -> OptimizeResult:
    """Best of ``opts.starts`` independent descents from uniform starts.

    Run k is seeded by mixing ``opts.seed`` with k, so the outcome does not
    depend on ``workers``.  Equal energies (within 1e-12) keep the lowest
    run index.  Per-run failures propagate only if every run fails.
    """
    if N < 2:
        raise ValueError(f"need N >= 2 points, got N={N}")
    del rng  # runs are seeded from opts.seed; kept for signature parity

    results: list[OptimizeResult | None] = [None] * opts.starts
    failures: list[Exception] = []

    def _run(k: int):
        try:
            results[k] = _one_start(m, N, evaluator, opts, k)
        except Exception as exc:  # collected; re-raised only if all runs fail
            failures.append(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_run, range(opts.starts)))
    else:
        for k in range(opts.starts):
            _run(k)

    best = None
    for res in results:
        if res is None:
            continue
        if best is None or res.energy < best.energy - 1e-12:
            best = res
    if best is None:
        raise OptimizerError(
            f"all {opts.starts} starts failed; first failure: {failures[0]!r}"
        ) from (failures[0] if failures else None)
    return best
