"""Interval modal objective for one alpha level.

The decision variable is a pair of stiffness vectors (lower, upper). The
model is solved at both vertices, the two solutions are mode-paired to the
box center, and the weighted squared errors between predicted and measured
eigenvalue/eigenvector bounds are summed into a single scalar objective.
Feasibility (global box plus nesting against the previous level) is handled
by projection so optimizers only ever evaluate feasible candidates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateVectorError,
    DomainError,
    ShapeError,
)
from .fuzzy import Interval, TriangularFuzzyNumber
from .linalg import ModalSolution, pair_modes
from .model import StructuralModel

__all__ = [
    "IntervalParameters",
    "WeightingConfig",
    "MeasuredModalIntervals",
    "MeasuredFuzzyModalData",
    "FeasibleRegion",
    "project_feasible",
    "interval_modal",
    "modal_scale_factor",
    "error_vectors",
    "objective_value",
    "load_measured",
    "save_measured",
]

_TWO_PI = 2.0 * math.pi


def hz_to_eigenvalue(f: float) -> float:
    """Frequency in Hz to eigenvalue in rad^2/s^2."""
    return (_TWO_PI * f) ** 2


def eigenvalue_to_hz(lam: float) -> float:
    """Eigenvalue in rad^2/s^2 to frequency in Hz."""
    return math.sqrt(lam) / _TWO_PI


@dataclass(frozen=True)
class IntervalParameters:
    """Lower and upper stiffness vectors: the 2d-dimensional decision variable."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ShapeError("lower and upper must be 1-D vectors of equal length")
        if np.any(lower > upper):
            raise DomainError("interval parameters crossed: lower > upper")

    @classmethod
    def from_point(cls, theta) -> "IntervalParameters":
        th = np.asarray(theta, dtype=float)
        return cls(th.copy(), th.copy())

    @classmethod
    def from_flat(cls, x) -> "IntervalParameters":
        x = np.asarray(x, dtype=float)
        d = x.size // 2
        return cls(x[:d].copy(), x[d:].copy())

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.lower, self.upper])

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def dimension(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class WeightingConfig:
    """Diagonals of the lower/upper weighting matrices.

    Each diagonal has one entry per stacked error component: first the n
    eigenvalue errors, then the n eigenvector errors.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size % 2:
            raise ShapeError("weight diagonals must be 1-D, equal, even-length vectors")
        if np.any(lower < 0.0) or np.any(upper < 0.0):
            raise DomainError("weights must be non-negative")

    @classmethod
    def identity(cls, n_modes: int) -> "WeightingConfig":
        w = np.ones(2 * n_modes)
        return cls(w, w.copy())

    @classmethod
    def from_scalars(cls, n_modes: int, eigenvalue: float = 1.0, eigenvector: float = 1.0) -> "WeightingConfig":
        """Uniform block weights for the eigenvalue and eigenvector parts."""
        w = np.concatenate([np.full(n_modes, float(eigenvalue)), np.full(n_modes, float(eigenvector))])
        return cls(w, w.copy())


class MeasuredModalIntervals:
    """Measured modal bounds at one alpha level.

    Eigenvalue intervals per mode plus unit-norm lower/upper measured mode
    shapes (columns of ``vec_lo`` / ``vec_hi``). Eigenvalue bounds must be
    positive and interval centers ascending.
    """

    def __init__(self, eig_lo, eig_hi, vec_lo, vec_hi):
        self.eig_lo = np.asarray(eig_lo, dtype=float)
        self.eig_hi = np.asarray(eig_hi, dtype=float)
        self.vec_lo = _unit_columns(np.asarray(vec_lo, dtype=float))
        self.vec_hi = _unit_columns(np.asarray(vec_hi, dtype=float))
        n = self.eig_lo.size
        if self.eig_hi.shape != (n,):
            raise ShapeError("eigenvalue bound arrays must have equal length")
        if self.vec_lo.shape != (self.vec_lo.shape[0], n) or self.vec_hi.shape != self.vec_lo.shape:
            raise ShapeError("eigenvector arrays must have one column per mode")
        if np.any(self.eig_lo <= 0.0) or np.any(self.eig_hi <= 0.0):
            raise DomainError("measured eigenvalue bounds must be positive")
        if np.any(self.eig_lo > self.eig_hi):
            raise DomainError("measured eigenvalue intervals crossed")
        centers = 0.5 * (self.eig_lo + self.eig_hi)
        if np.any(np.diff(centers) < 0.0):
            raise DomainError("measured eigenvalue interval centers must be ascending")

    @property
    def n_modes(self) -> int:
        return self.eig_lo.size


def _unit_columns(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateVectorError("measured mode shape is a zero vector")
    return mat / norms


@dataclass(frozen=True)
class FeasibleRegion:
    """Box constraints for one alpha level.

    The lower parameters live in [theta_min, prev_lower] and the upper
    parameters in [prev_upper, theta_max]; without a previous-level
    solution both live in the global box. Exposes the flattened-vector
    interface (``lo``, ``hi``, ``project``) that the optimizers consume.
    """

    theta_min: np.ndarray
    theta_max: np.ndarray
    prev_lower: np.ndarray | None = None
    prev_upper: np.ndarray | None = None

    def __post_init__(self):
        tmin = np.asarray(self.theta_min, dtype=float)
        tmax = np.asarray(self.theta_max, dtype=float)
        object.__setattr__(self, "theta_min", tmin)
        object.__setattr__(self, "theta_max", tmax)
        if tmin.shape != tmax.shape or tmin.ndim != 1:
            raise ConfigurationError("theta_min and theta_max must be 1-D and equal length")
        if np.any(tmin > tmax):
            raise ConfigurationError("theta_min must not exceed theta_max")
        if (self.prev_lower is None) != (self.prev_upper is None):
            raise ConfigurationError("previous bounds must be given together")
        if self.prev_lower is not None:
            pl = np.asarray(self.prev_lower, dtype=float)
            pu = np.asarray(self.prev_upper, dtype=float)
            object.__setattr__(self, "prev_lower", pl)
            object.__setattr__(self, "prev_upper", pu)
            if pl.shape != tmin.shape or pu.shape != tmin.shape:
                raise ConfigurationError("previous bounds must match the box dimension")
            if np.any(pl > pu) or np.any(pl < tmin) or np.any(pu > tmax):
                raise ConfigurationError(
                    "previous-level solution violates theta_min <= lower <= upper <= theta_max"
                )

    @property
    def dimension(self) -> int:
        return 2 * self.theta_min.size

    @property
    def lo(self) -> np.ndarray:
        pu = self.theta_min if self.prev_upper is None else self.prev_upper
        return np.concatenate([self.theta_min, pu])

    @property
    def hi(self) -> np.ndarray:
        pl = self.theta_max if self.prev_lower is None else self.prev_lower
        return np.concatenate([pl, self.theta_max])

    def _project_arrays(self, lower, upper) -> tuple[np.ndarray, np.ndarray]:
        lo_hi = self.theta_max if self.prev_lower is None else self.prev_lower
        hi_lo = self.theta_min if self.prev_upper is None else self.prev_upper
        lower = np.clip(np.asarray(lower, dtype=float), self.theta_min, lo_hi)
        upper = np.clip(np.asarray(upper, dtype=float), hi_lo, self.theta_max)
        crossed = lower > upper
        if np.any(crossed):
            mid = 0.5 * (lower[crossed] + upper[crossed])
            lower[crossed] = np.clip(mid, self.theta_min[crossed], lo_hi[crossed])
            upper[crossed] = np.clip(mid, hi_lo[crossed], self.theta_max[crossed])
        return lower, upper

    def project_interval(self, candidate: IntervalParameters) -> IntervalParameters:
        """Clamp a candidate into the region, repairing crossed bounds.

        Crossed components (possible only without previous-level anchors)
        collapse to their midpoint, clamped into both component ranges.
        """
        lower, upper = self._project_arrays(candidate.lower, candidate.upper)
        return IntervalParameters(lower, upper)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Flat-vector form of ``project_interval`` for the optimizers."""
        x = np.asarray(x, dtype=float)
        d = self.theta_min.size
        lower, upper = self._project_arrays(x[:d], x[d:])
        return np.concatenate([lower, upper])


def project_feasible(candidate: IntervalParameters, region: FeasibleRegion) -> IntervalParameters:
    """Project interval parameters into the feasible region (idempotent)."""
    return region.project_interval(candidate)


def modal_scale_factor(phi_measured, phi) -> float:
    """Least-squares scale aligning an analytical shape with a measured one.

    Minimizes ``norm(phi_measured - beta * phi)`` over beta, i.e.
    ``beta = (phi_measured . phi) / (phi . phi)``.
    """
    pm = np.asarray(phi_measured, dtype=float).ravel()
    p = np.asarray(phi, dtype=float).ravel()
    if pm.shape != p.shape:
        raise ShapeError("mode shapes differ in length")
    denom = float(p @ p)
    if denom == 0.0:
        raise DegenerateVectorError("cannot scale against a zero vector")
    return float(pm @ p) / denom


def interval_modal(
    model: StructuralModel, params: IntervalParameters
) -> tuple[ModalSolution, ModalSolution]:
    """Vertex modal solutions at (lower, upper), tracked to the box center.

    Both vertex solutions are mode-paired to the center solution via MAC
    (so index j means the same physical mode at both vertices) and their
    eigenvectors are sign-aligned with the center shapes.
    """
    center = model.modal(params.center)
    lower = _paired_to(center, model.modal(params.lower))
    upper = _paired_to(center, model.modal(params.upper))
    return lower, upper


def _paired_to(center: ModalSolution, sol: ModalSolution) -> ModalSolution:
    perm = pair_modes(center, sol)
    out = sol.reordered(perm)
    flip = np.sum(out.eigenvectors * center.eigenvectors, axis=0) < 0.0
    out.eigenvectors[:, flip] = -out.eigenvectors[:, flip]
    return out


def error_vectors(
    measured: MeasuredModalIntervals,
    predicted_lower: ModalSolution,
    predicted_upper: ModalSolution,
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked lower and upper error vectors, each of length 2n.

    Entries 0..n-1 are relative eigenvalue errors; entries n..2n-1 are
    scale-normalized eigenvector errors (invariant to eigenvector scaling,
    since the scale factor is the least-squares minimizer).
    """
    n = measured.n_modes
    if predicted_lower.n_modes != n or predicted_upper.n_modes != n:
        raise ShapeError("predicted and measured mode counts differ")
    e_lo = np.empty(2 * n)
    e_hi = np.empty(2 * n)
    e_lo[:n] = (measured.eig_lo - predicted_lower.eigenvalues) / measured.eig_lo
    e_hi[:n] = (predicted_upper.eigenvalues - measured.eig_hi) / measured.eig_hi
    e_lo[n:] = _shape_errors(measured.vec_lo, predicted_lower.eigenvectors)
    e_hi[n:] = _shape_errors(measured.vec_hi, predicted_upper.eigenvectors)
    return e_lo, e_hi


def _shape_errors(measured_cols: np.ndarray, predicted_cols: np.ndarray) -> np.ndarray:
    """Column-wise least-squares-scaled residual norms (one per mode)."""
    denom = np.einsum("ij,ij->j", predicted_cols, predicted_cols)
    if np.any(denom == 0.0):
        raise DegenerateVectorError("predicted mode shape is a zero vector")
    beta = np.einsum("ij,ij->j", measured_cols, predicted_cols) / denom
    resid = measured_cols - predicted_cols * beta
    return np.sqrt(
        np.einsum("ij,ij->j", resid, resid)
        / np.einsum("ij,ij->j", measured_cols, measured_cols)
    )


def objective_value(
    model: StructuralModel,
    params: IntervalParameters,
    measured: MeasuredModalIntervals,
    weights: WeightingConfig,
) -> float:
    """Weighted squared error of both interval branches; zero iff both vanish."""
    lower, upper = interval_modal(model, params)
    e_lo, e_hi = error_vectors(measured, lower, upper)
    if weights.lower.size != e_lo.size:
        raise ShapeError(
            f"weights sized for {weights.lower.size // 2} modes, data has {measured.n_modes}"
        )
    return float(e_lo @ (weights.lower * e_lo) + e_hi @ (weights.upper * e_hi))


class MeasuredFuzzyModalData:
    """Fuzzy measured modal data: one eigenvalue TFN per mode plus mode shapes.

    Mode shapes are either crisp (one vector per mode) or fuzzy
    (per-component TFNs); crisp is the common case. Internally eigenvalues
    are in rad^2/s^2; files store Hz by default.
    """

    def __init__(self, eigenvalue_tfns, mode_shapes, shape_tfns=None):
        self.eigenvalue_tfns = list(eigenvalue_tfns)
        self.mode_shapes = _unit_columns(np.asarray(mode_shapes, dtype=float))
        self.shape_tfns = shape_tfns
        n = len(self.eigenvalue_tfns)
        if self.mode_shapes.shape[1] != n:
            raise ShapeError("need one mode-shape column per eigenvalue TFN")
        if any(t.a <= 0.0 for t in self.eigenvalue_tfns):
            raise DomainError("eigenvalue TFN supports must be positive")
        if shape_tfns is not None and (
            len(shape_tfns) != n or any(len(col) != self.mode_shapes.shape[0] for col in shape_tfns)
        ):
            raise ShapeError("shape TFNs must be given per mode, per component")

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalue_tfns)

    @property
    def is_crisp(self) -> bool:
        return all(t.is_crisp for t in self.eigenvalue_tfns)

    def center_eigenvalues(self) -> np.ndarray:
        return np.array([t.b for t in self.eigenvalue_tfns])

    def cuts_at(self, alpha: float) -> MeasuredModalIntervals:
        """Measured bounds at one alpha level.

        With crisp shapes the lower and upper measured mode shapes both
        equal the stored vectors; with fuzzy shapes they are the
        component-wise cut endpoints.
        """
        cuts = [t.alpha_cut(alpha) for t in self.eigenvalue_tfns]
        eig_lo = np.array([c.lo for c in cuts])
        eig_hi = np.array([c.hi for c in cuts])
        if self.shape_tfns is None:
            vec_lo = self.mode_shapes
            vec_hi = self.mode_shapes
        else:
            vec_lo = np.empty_like(self.mode_shapes)
            vec_hi = np.empty_like(self.mode_shapes)
            for j, col in enumerate(self.shape_tfns):
                for i, tfn in enumerate(col):
                    cut = tfn.alpha_cut(alpha)
                    vec_lo[i, j] = cut.lo
                    vec_hi[i, j] = cut.hi
        return MeasuredModalIntervals(eig_lo, eig_hi, vec_lo, vec_hi)


def save_measured(data: MeasuredFuzzyModalData, path, units: str = "hz") -> None:
    """Write measured fuzzy modal data as JSON (eigenvalue TFNs in Hz by default)."""
    if units not in ("hz", "eigenvalue"):
        raise ConfigurationError(f"unknown units {units!r}; use 'hz' or 'eigenvalue'")
    convert = eigenvalue_to_hz if units == "hz" else (lambda x: x)
    modes = []
    for j, tfn in enumerate(data.eigenvalue_tfns):
        entry = {
            "eigenvalue": [convert(tfn.a), convert(tfn.b), convert(tfn.c)],
            "mode_shape": [float(v) for v in data.mode_shapes[:, j]],
        }
        if data.is_crisp:
            entry["crisp"] = True
        if data.shape_tfns is not None:
            entry["mode_shape_tfns"] = [[t.a, t.b, t.c] for t in data.shape_tfns[j]]
        modes.append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"units": units, "modes": modes}, fh, indent=2)
        fh.write("\n")


def load_measured(path) -> MeasuredFuzzyModalData:
    """Read measured fuzzy modal data, converting Hz TFNs to eigenvalues."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    units = raw.get("units", "hz")
    if units not in ("hz", "eigenvalue"):
        raise ConfigurationError(f"{path}: unknown units {units!r}")
    convert = hz_to_eigenvalue if units == "hz" else (lambda x: x)
    try:
        mode_entries = raw["modes"]
        tfns = [
            TriangularFuzzyNumber(*(convert(float(v)) for v in entry["eigenvalue"]))
            for entry in mode_entries
        ]
        shapes = np.array([entry["mode_shape"] for entry in mode_entries], dtype=float).T
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}: malformed measured-data file: {exc}") from exc
    shape_tfns = None
    if any("mode_shape_tfns" in entry for entry in mode_entries):
        shape_tfns = [
            [TriangularFuzzyNumber(*vals) for vals in entry["mode_shape_tfns"]]
            for entry in mode_entries
        ]
    return MeasuredFuzzyModalData(tfns, shapes, shape_tfns)
