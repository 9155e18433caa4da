"""Empirical checks of the equidistribution theory at desk scale.

Three kinds of evidence: the uniform-measure potential of the Green kernel
is constant (and zero under the zero-mean normalization), minimizers'
moment statistics and ball discrepancy shrink as N grows, and the scaled
minimal energy E/N^2 climbs toward the Wiener constant 0.  All Monte Carlo
paths are seeded, with per-statistic sub-streams mixed from one seed, so a
report is a pure function of (configuration, kernel, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .energy import energy, separation
from .geometry import Configuration, Family, Manifold, Point, random_point
from .kernel import KernelEvaluator
from .optimize import OptimizeOptions, OptimizeResult, mix_seed, multi_start
from .radial import ball_volume_fraction

__all__ = [
    "PotentialTest",
    "DiagnosticsReport",
    "ScaledEnergyPoint",
    "potential_mc",
    "moment_tests",
    "ball_discrepancy",
    "scaled_energy_sequence",
    "diagnostics_report",
]

_MC_BATCH = 200_000
_STREAM_POTENTIAL = 0xD1A6
_STREAM_BALLS = 0xBA11
_STREAM_POINTS = 0xBA5E


@dataclass(frozen=True)
class PotentialTest:
    point: Point
    mc_mean: float
    mc_stderr: float
    n_samples: int


@dataclass(frozen=True)
class MomentStats:
    mean_vector_norm: float
    second_moment_deviation: float


@dataclass(frozen=True)
class DiagnosticsReport:
    potential_tests: tuple[PotentialTest, ...]
    mean_vector_norm: float
    second_moment_deviation: float
    ball_discrepancy: float
    separation: float
    scaled_energy: float
    N: int


@dataclass(frozen=True)
class ScaledEnergyPoint:
    N: int
    scaled_energy: float
    result: OptimizeResult


def _uniform_rows(m: Manifold, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ambient representatives, one per row (gauge left arbitrary)."""
    Z = rng.standard_normal((count, m.ambient_real_dim))
    return Z / np.linalg.norm(Z, axis=1)[:, None]


def _distances_to(m: Manifold, rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Geodesic distances from every row to the single representative x."""
    fam = _backend.family_code(m)
    if fam == 0:
        c = np.clip(rows @ x, -1.0, 1.0)
    elif fam == 1:
        c = np.clip(np.abs(rows @ x), 0.0, 1.0)
    elif fam == 2:
        Z = np.ascontiguousarray(rows).view(np.complex128)
        zx = np.ascontiguousarray(x).view(np.complex128)
        c = np.clip(np.abs(Z @ np.conj(zx)), 0.0, 1.0)
    else:
        Q = rows.reshape(rows.shape[0], -1, 4)
        qx = x.reshape(-1, 4)
        pw, px_, py, pz = Q[..., 0], Q[..., 1], Q[..., 2], Q[..., 3]
        xw, xx, xy, xz = qx[:, 0], qx[:, 1], qx[:, 2], qx[:, 3]
        hw = pw @ xw + px_ @ xx + py @ xy + pz @ xz
        hx = pw @ xx - px_ @ xw - py @ xz + pz @ xy
        hy = pw @ xy + px_ @ xz - py @ xw - pz @ xx
        hz = pw @ xz - px_ @ xy + py @ xx - pz @ xw
        c = np.clip(np.sqrt(hw**2 + hx**2 + hy**2 + hz**2), 0.0, 1.0)
    return np.arccos(c)


def potential_mc(
    evaluator: KernelEvaluator,
    x: Point,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate of the uniform-measure potential at x.

    Returns (mean, stderr); for the zero-mean Green kernel the expected
    value is 0.  Samples that collide with x below r_min are redrawn.
    """
    if n_samples < 1000:
        raise ValueError(f"need at least 1e3 samples, got {n_samples}")
    m = evaluator.manifold
    if x.manifold != m:
        raise ValueError("base point is bound to a different manifold")
    total = 0.0
    total_sq = 0.0
    seen = 0
    while seen < n_samples:
        count = min(_MC_BATCH, n_samples - seen)
        rows = _uniform_rows(m, count, rng)
        d = _distances_to(m, rows, x.ambient)
        bad = d <= evaluator.r_min
        while np.any(bad):
            redraw = _uniform_rows(m, int(bad.sum()), rng)
            d[bad] = _distances_to(m, redraw, x.ambient)
            bad = d <= evaluator.r_min
        vals = evaluator.phi(d)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        seen += count
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return mean, math.sqrt(var / n_samples)


def _canonical_matrix(config: Configuration) -> np.ndarray:
    from .geometry import _canonical_gauge  # gauge-fix a copy for statistics

    m = config.manifold
    return np.stack([_canonical_gauge(m, p.ambient) for p in config.points])


def moment_tests(config: Configuration) -> MomentStats:
    """First/second ambient moment deviations from the uniform targets.

    Uniform reference: mean vector 0 (exact for spheres; projective gauge
    fixing biases the mean, so only the deviation is reported there) and
    scalar second moment z z* = I/(n+1), which is gauge-invariant.
    """
    m = config.manifold
    X = _canonical_matrix(config)
    N = X.shape[0]
    k = m.n_scalars
    mean_norm = float(np.linalg.norm(X.mean(axis=0)))
    fam = _backend.family_code(m)
    if fam <= 1:
        M = X.T @ X / N
        dev = float(np.linalg.norm(M - np.eye(k) / k))
    elif fam == 2:
        Z = np.ascontiguousarray(X).view(np.complex128)
        M = Z.T @ np.conj(Z) / N
        dev = float(np.linalg.norm(M - np.eye(k) / k))
    else:
        Q = X.reshape(N, k, 4)
        w, a, b, c = Q[..., 0], Q[..., 1], Q[..., 2], Q[..., 3]
        # quaternionic z z*: entry (j, l) = sum_i q_ij * conj(q_il)
        Mw = (w.T @ w + a.T @ a + b.T @ b + c.T @ c) / N
        Mx = (-w.T @ a + a.T @ w - b.T @ c + c.T @ b) / N
        My = (-w.T @ b + a.T @ c + b.T @ w - c.T @ a) / N
        Mz = (-w.T @ c - a.T @ b + b.T @ a + c.T @ w) / N
        Mw -= np.eye(k) / k
        dev = float(np.sqrt((Mw**2 + Mx**2 + My**2 + Mz**2).sum()))
    return MomentStats(mean_norm, dev)


def ball_discrepancy(
    config: Configuration, trials: int, rng: np.random.Generator
) -> float:
    """Sup over random geodesic balls of |empirical fraction - uniform mass|.

    Centers are uniform on the manifold, radii uniform on (0, D); the sup
    runs over the sampled balls only, which is reproducible given the seed
    and enough for trend detection.
    """
    if trials < 1000:
        raise ValueError(f"need at least 1e3 trials, got {trials}")
    m = config.manifold
    D = m.diameter
    X = config.matrix()
    N = X.shape[0]
    worst = 0.0
    remaining = trials
    block = max(1, min(trials, _MC_BATCH // max(N, 1)))
    while remaining > 0:
        count = min(block, remaining)
        centers = _uniform_rows(m, count, rng)
        radii = rng.uniform(0.0, D, size=count)
        for center, radius in zip(centers, radii):
            d = _distances_to(m, X, center)
            frac = float(np.count_nonzero(d <= radius)) / N
            dev = abs(frac - ball_volume_fraction(m, float(radius)))
            if dev > worst:
                worst = dev
        remaining -= count
    return worst


def scaled_energy_sequence(
    m: Manifold,
    evaluator: KernelEvaluator,
    N_list: list[int],
    opts: OptimizeOptions,
    workers: int = 1,
) -> list[ScaledEnergyPoint]:
    """Multi-start minimization for each N; scaled energies E/N^2 in order."""
    if sorted(N_list) != list(N_list):
        raise ValueError("N_list must be increasing")
    out = []
    for N in N_list:
        res = multi_start(m, N, evaluator, opts, workers=workers)
        out.append(ScaledEnergyPoint(N, res.energy / (N * N), res))
    return out


def diagnostics_report(
    config: Configuration,
    evaluator: KernelEvaluator,
    trials: int,
    seed: int,
    potential_points: int = 3,
    potential_samples: int = 100_000,
) -> DiagnosticsReport:
    """Full diagnostics for one configuration under one kernel."""
    m = config.manifold
    rng_points = np.random.default_rng(mix_seed(seed, _STREAM_POINTS))
    bases = [random_point(m, rng_points) for _ in range(potential_points)]
    tests = []
    for idx, base in enumerate(bases):
        rng_mc = np.random.default_rng(mix_seed(seed, _STREAM_POTENTIAL + idx))
        mean, stderr = potential_mc(evaluator, base, potential_samples, rng_mc)
        tests.append(PotentialTest(base, mean, stderr, potential_samples))
    moments = moment_tests(config)
    rng_balls = np.random.default_rng(mix_seed(seed, _STREAM_BALLS))
    disc = ball_discrepancy(config, trials, rng_balls)
    report = energy(config, evaluator)
    return DiagnosticsReport(
        potential_tests=tuple(tests),
        mean_vector_norm=moments.mean_vector_norm,
        second_moment_deviation=moments.second_moment_deviation,
        ball_discrepancy=disc,
        separation=separation(config),
        scaled_energy=report.scaled,
        N=len(config),
    )
