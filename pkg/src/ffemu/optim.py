"""Population metaheuristics for box-constrained continuous minimization.

Two optimizers share one calling convention: a continuous ant colony
optimizer built around a ranked solution archive with per-dimension
Gaussian kernel sampling, and a standard inertia-weight particle swarm.
Both only ever evaluate candidates that the region has projected into the
feasible set, and both are bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EvaluationError, ShapeError

__all__ = [
    "Box",
    "SolutionArchive",
    "AcoConfig",
    "PsoConfig",
    "OptimizationResult",
    "aco_weights",
    "selection_probabilities",
    "aco_sigma",
    "aco_construct",
    "aco_minimize",
    "pso_minimize",
    "write_history_csv",
]


@dataclass(frozen=True)
class Box:
    """Plain axis-aligned box region; projection is componentwise clamping."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ShapeError("box bounds must be 1-D and equal length")
        if np.any(lo > hi):
            raise DomainError("box bounds out of order")

    @property
    def dimension(self) -> int:
        return self.lo.size

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)


@dataclass(frozen=True)
class AcoConfig:
    """Archive-based continuous ACO settings.

    ``q`` spreads the rank weights (small q concentrates sampling on the
    best rows); ``xi`` scales the per-dimension sampling spread and plays
    the role pheromone evaporation plays in the discrete algorithm.
    """

    archive_size: int = 10
    n_ants: int = 20
    q: float = 0.5
    xi: float = 1.0
    max_iterations: int = 300
    stagnation_window: int = 50
    stagnation_tolerance: float = 1e-10
    rng_seed: int = 0
    per_dimension_guides: bool = True

    def __post_init__(self):
        if self.archive_size < 2:
            raise DomainError("archive_size must be at least 2")
        if self.n_ants < 1:
            raise DomainError("n_ants must be at least 1")
        if self.q <= 0.0 or self.xi <= 0.0:
            raise DomainError("q and xi must be positive")
        if self.max_iterations < 0 or self.stagnation_window < 1:
            raise DomainError("invalid iteration limits")


@dataclass(frozen=True)
class PsoConfig:
    """Inertia-weight PSO settings with per-dimension velocity clamping.

    ``v_max_fraction`` sets the velocity clamp as a fraction of each
    dimension's box width; with ``rescale_velocity_per_level`` the clamp
    follows the current (possibly shrunken) region instead of staying at
    the width it had when a run started.
    """

    swarm_size: int = 80
    inertia: float = 0.729
    cognitive: float = 1.494
    social: float = 1.494
    v_max_fraction: float = 0.5
    rescale_velocity_per_level: bool = True
    max_iterations: int = 300
    stagnation_window: int = 50
    stagnation_tolerance: float = 1e-10
    rng_seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 2:
            raise DomainError("swarm_size must be at least 2")
        if not 0.0 < self.v_max_fraction <= 1.0:
            raise DomainError("v_max_fraction must be in (0, 1]")
        if self.max_iterations < 0 or self.stagnation_window < 1:
            raise DomainError("invalid iteration limits")


@dataclass
class OptimizationResult:
    """Outcome of one optimizer run.

    ``history_best`` / ``history_mean`` carry one entry for the initial
    population plus one per iteration; ``population_x`` / ``population_f``
    are the final archive rows (ACO) or personal bests (PSO).
    """

    best_x: np.ndarray
    best_f: float
    history_best: np.ndarray
    history_mean: np.ndarray
    n_evaluations: int
    n_iterations: int
    population_x: np.ndarray
    population_f: np.ndarray


class SolutionArchive:
    """Fixed-size archive of the best solutions seen, sorted by objective.

    Row 0 is the incumbent best. Updates merge new candidates and keep the
    lowest objective values; ties keep the earlier insertion (stable sort),
    so results are deterministic.
    """

    def __init__(self, points, values):
        self.x = np.array(points, dtype=float)
        self.f = np.array(values, dtype=float)
        if self.x.ndim != 2 or self.f.shape != (self.x.shape[0],):
            raise ShapeError("archive needs a (Q, d) point array and Q values")
        if self.x.shape[0] < 2:
            raise DomainError("archive needs at least 2 rows")
        order = np.argsort(self.f, kind="stable")
        self.x = self.x[order]
        self.f = self.f[order]

    def __len__(self) -> int:
        return self.f.size

    @property
    def best_x(self) -> np.ndarray:
        return self.x[0]

    @property
    def best_f(self) -> float:
        return float(self.f[0])

    def update(self, points, values) -> None:
        """Merge candidates, keep the best ``len(self)`` rows."""
        q = len(self)
        all_x = np.vstack([self.x, np.asarray(points, dtype=float)])
        all_f = np.concatenate([self.f, np.asarray(values, dtype=float)])
        order = np.argsort(all_f, kind="stable")[:q]
        self.x = all_x[order]
        self.f = all_f[order]

    def sigma_matrix(self, xi: float) -> np.ndarray:
        """Per-row, per-dimension sampling spreads: xi times the mean
        absolute distance to the other rows (divisor Q - 1)."""
        diffs = np.abs(self.x[:, None, :] - self.x[None, :, :])
        return xi * diffs.sum(axis=1) / (len(self) - 1)


def aco_weights(archive_size: int, q: float) -> np.ndarray:
    """Rank weights: a Gaussian in (rank - 1) with spread q * archive_size."""
    if archive_size < 1:
        raise DomainError("archive_size must be at least 1")
    if q <= 0.0:
        raise DomainError("q must be positive")
    ranks = np.arange(1, archive_size + 1, dtype=float)
    norm = 1.0 / (q * archive_size * math.sqrt(2.0 * math.pi))
    return norm * np.exp(-((ranks - 1.0) ** 2) / (2.0 * q**2 * archive_size**2))


def selection_probabilities(weights) -> np.ndarray:
    """Normalize non-negative weights into selection probabilities."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0):
        raise DomainError("weights must be non-negative")
    total = w.sum()
    if total == 0.0:
        raise DomainError("all-zero weights give a degenerate distribution")
    return w / total


def aco_sigma(archive: SolutionArchive, dim_index: int, row_index: int, xi: float) -> float:
    """Sampling spread for one archive row and dimension.

    Zero exactly when every archive row shares that dimension's value.
    """
    if len(archive) < 2:
        raise DomainError("sigma needs at least 2 archive rows")
    col = archive.x[:, dim_index]
    return float(xi * np.abs(col - col[row_index]).sum() / (len(archive) - 1))


def aco_construct(archive: SolutionArchive, config: AcoConfig, region, rng) -> np.ndarray:
    """Construct ``n_ants`` candidates by Gaussian-kernel sampling.

    Per dimension each ant picks a guide row by rank-weight roulette, then
    samples a Gaussian centered on that row's component with the archive
    dispersion as spread. Candidates are projected feasible before return.
    """
    q_rows = len(archive)
    dim = archive.x.shape[1]
    probs = selection_probabilities(aco_weights(q_rows, config.q))
    sig = archive.sigma_matrix(config.xi)
    if config.per_dimension_guides:
        rows = rng.choice(q_rows, size=(config.n_ants, dim), p=probs)
    else:
        rows = np.repeat(rng.choice(q_rows, size=(config.n_ants, 1), p=probs), dim, axis=1)
    cols = np.arange(dim)[None, :]
    candidates = rng.normal(archive.x[rows, cols], sig[rows, cols])
    return np.array([region.project(c) for c in candidates])


def _evaluate(f, points, executor=None) -> np.ndarray:
    if executor is None:
        values = [f(p) for p in points]
    else:
        values = list(executor.map(f, points))
    arr = np.asarray(values, dtype=float)
    bad = np.nonzero(~np.isfinite(arr))[0]
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(
            f"objective returned {arr[i]!r} at {points[i]!r}", point=points[i], value=arr[i]
        )
    return arr


def _initial_points(region, count: int, rng, initial) -> np.ndarray:
    seeds = []
    if initial is not None:
        seeds = [region.project(np.asarray(p, dtype=float)) for p in initial][:count]
    n_random = count - len(seeds)
    random_pts = rng.uniform(region.lo, region.hi, size=(n_random, region.lo.size))
    pts = list(seeds) + [region.project(p) for p in random_pts]
    return np.array(pts)


def _stagnated(history: list, window: int, tolerance: float) -> bool:
    return len(history) > window and history[-1 - window] - history[-1] < tolerance


def aco_minimize(f, region, config: AcoConfig, initial=None, executor=None) -> OptimizationResult:
    """Minimize ``f`` over the region with archive-based continuous ACO.

    ``initial`` points (projected) seed the starting archive; the rest is
    filled uniformly at random. Every candidate a row of the archive ever
    held was evaluated through ``f``; bookkeeping is exact.
    """
    rng = np.random.default_rng(config.rng_seed)
    pts = _initial_points(region, config.archive_size, rng, initial)
    vals = _evaluate(f, pts, executor)
    n_evals = len(pts)
    archive = SolutionArchive(pts, vals)
    history_best = [archive.best_f]
    history_mean = [float(archive.f.mean())]
    iterations = 0
    for _ in range(config.max_iterations):
        candidates = aco_construct(archive, config, region, rng)
        values = _evaluate(f, candidates, executor)
        n_evals += len(candidates)
        archive.update(candidates, values)
        history_best.append(archive.best_f)
        history_mean.append(float(archive.f.mean()))
        iterations += 1
        if _stagnated(history_best, config.stagnation_window, config.stagnation_tolerance):
            break
    return OptimizationResult(
        best_x=archive.best_x.copy(),
        best_f=archive.best_f,
        history_best=np.array(history_best),
        history_mean=np.array(history_mean),
        n_evaluations=n_evals,
        n_iterations=iterations,
        population_x=archive.x.copy(),
        population_f=archive.f.copy(),
    )


def pso_minimize(
    f, region, config: PsoConfig, initial=None, executor=None, v_max_widths=None
) -> OptimizationResult:
    """Minimize ``f`` over the region with a standard global-best PSO.

    Velocities are clamped to ``v_max_fraction`` of the per-dimension
    widths; pass ``v_max_widths`` to clamp against different (e.g. original
    full-box) widths instead of the current region's.
    """
    rng = np.random.default_rng(config.rng_seed)
    widths = (region.hi - region.lo) if v_max_widths is None else np.asarray(v_max_widths, dtype=float)
    v_max = config.v_max_fraction * widths
    x = _initial_points(region, config.swarm_size, rng, initial)
    fx = _evaluate(f, x, executor)
    n_evals = len(x)
    v = np.zeros_like(x)
    pbest_x = x.copy()
    pbest_f = fx.copy()
    g = int(np.argmin(pbest_f))
    gbest_x = pbest_x[g].copy()
    gbest_f = float(pbest_f[g])
    history_best = [gbest_f]
    history_mean = [float(fx.mean())]
    iterations = 0
    for _ in range(config.max_iterations):
        r1 = rng.uniform(size=x.shape)
        r2 = rng.uniform(size=x.shape)
        v = (
            config.inertia * v
            + config.cognitive * r1 * (pbest_x - x)
            + config.social * r2 * (gbest_x[None, :] - x)
        )
        v = np.clip(v, -v_max, v_max)
        x = np.array([region.project(p) for p in x + v])
        fx = _evaluate(f, x, executor)
        n_evals += len(x)
        improved = fx < pbest_f
        pbest_x[improved] = x[improved]
        pbest_f[improved] = fx[improved]
        g = int(np.argmin(pbest_f))
        if float(pbest_f[g]) < gbest_f:
            gbest_f = float(pbest_f[g])
            gbest_x = pbest_x[g].copy()
        history_best.append(gbest_f)
        history_mean.append(float(fx.mean()))
        iterations += 1
        if _stagnated(history_best, config.stagnation_window, config.stagnation_tolerance):
            break
    return OptimizationResult(
        best_x=gbest_x,
        best_f=gbest_f,
        history_best=np.array(history_best),
        history_mean=np.array(history_mean),
        n_evaluations=n_evals,
        n_iterations=iterations,
        population_x=pbest_x,
        population_f=pbest_f,
    )


def write_history_csv(result: OptimizationResult, path) -> None:
    """Dump convergence history as (iteration, best_f, mean_f) rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_f", "mean_f"])
        for i, (b, m) in enumerate(zip(result.history_best, result.history_mean)):
            writer.writerow([i, repr(float(b)), repr(float(m))])
