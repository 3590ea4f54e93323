"""Parametric mass-spring structural models.

A model holds point masses and spring elements between nodes (or node to
ground). Each spring's stiffness is either a fixed value or a reference
into the updating-parameter vector, so ``K(theta)`` assembles by standard
superposition and the mass matrix is diagonal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DomainError, ShapeError
from .linalg import ModalSolution, fix_signs, generalized_eig

__all__ = ["GROUND", "SpringElement", "StructuralModel", "load_model", "model_from_dict"]

GROUND = -1


@dataclass(frozen=True)
class SpringElement:
    """One spring; endpoints are 0-based node indices, GROUND (-1) for a support.

    Exactly one of ``stiffness`` (fixed, N/m) or ``param_index`` (position
    in the updating vector) must be given.
    """

    id: str
    node_a: int
    node_b: int
    stiffness: float | None = None
    param_index: int | None = None

    def __post_init__(self):
        if (self.stiffness is None) == (self.param_index is None):
            raise ConfigurationError(
                f"spring {self.id!r}: give exactly one of stiffness or param_index"
            )
        if self.node_a == GROUND and self.node_b == GROUND:
            raise ConfigurationError(f"spring {self.id!r}: at most one endpoint may be ground")
        if GROUND not in (self.node_a, self.node_b) and self.node_a == self.node_b:
            raise ConfigurationError(f"spring {self.id!r}: endpoints must differ")
        if self.stiffness is not None and self.stiffness <= 0.0:
            raise ConfigurationError(f"spring {self.id!r}: fixed stiffness must be positive")
        if self.param_index is not None and self.param_index < 0:
            raise ConfigurationError(f"spring {self.id!r}: param_index must be non-negative")


@dataclass(frozen=True)
class StructuralModel:
    """Masses (kg) plus spring list; ``parameter_count`` is the updating dimension."""

    masses: np.ndarray
    springs: tuple[SpringElement, ...]
    parameter_count: int

    def __post_init__(self):
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))
        object.__setattr__(self, "springs", tuple(self.springs))
        if self.masses.ndim != 1 or self.masses.size == 0:
            raise ConfigurationError("masses must be a non-empty 1-D array")
        if np.any(self.masses <= 0.0):
            raise ConfigurationError("all masses must be positive")
        n = self.masses.size
        referenced = set()
        for s in self.springs:
            for node in (s.node_a, s.node_b):
                if node != GROUND and not 0 <= node < n:
                    raise ConfigurationError(
                        f"spring {s.id!r}: node {node} outside 0..{n - 1}"
                    )
            if s.param_index is not None:
                if s.param_index >= self.parameter_count:
                    raise ConfigurationError(
                        f"spring {s.id!r}: param_index {s.param_index} "
                        f"outside 0..{self.parameter_count - 1}"
                    )
                referenced.add(s.param_index)
        missing = set(range(self.parameter_count)) - referenced
        if missing:
            raise ConfigurationError(
                f"updating parameters never referenced by any spring: {sorted(missing)}"
            )

    @property
    def n_dof(self) -> int:
        return self.masses.size

    @cached_property
    def _assembly(self) -> tuple[np.ndarray, np.ndarray]:
        """Fixed-spring stiffness plus one unit-stiffness matrix per parameter;
        K(theta) is exactly their linear superposition."""
        n = self.n_dof
        fixed = np.zeros((n, n))
        units = np.zeros((self.parameter_count, n, n))
        for s in self.springs:
            target = fixed if s.param_index is None else units[s.param_index]
            k = 1.0 if s.param_index is not None else s.stiffness
            if s.node_a == GROUND:
                target[s.node_b, s.node_b] += k
            elif s.node_b == GROUND:
                target[s.node_a, s.node_a] += k
            else:
                a, b = s.node_a, s.node_b
                target[a, a] += k
                target[b, b] += k
                target[a, b] -= k
                target[b, a] -= k
        return fixed, units

    def assemble(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """Stiffness and mass matrices at the given updating vector.

        A ground spring k at node i adds k to K[i, i]; a spring between
        nodes i and j adds k to both diagonal entries and -k off-diagonal.
        """
        th = np.asarray(theta, dtype=float)
        if th.shape != (self.parameter_count,):
            raise ShapeError(
                f"theta has shape {th.shape}, expected ({self.parameter_count},)"
            )
        if np.any(th <= 0.0):
            raise DomainError("all stiffness parameters must be positive")
        fixed, units = self._assembly
        k_mat = fixed + np.tensordot(th, units, axes=1)
        return k_mat, np.diag(self.masses)

    @cached_property
    def _inv_sqrt_masses(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.masses)

    def modal(self, theta) -> ModalSolution:
        """Modal solution of the assembled (K(theta), M) pair.

        Identical to ``generalized_eig(*self.assemble(theta))``; the mass
        matrix here is diagonal by construction, so the reduction to the
        standard problem is applied directly without re-validating shapes.
        """
        th = np.asarray(theta, dtype=float)
        if th.shape != (self.parameter_count,):
            raise ShapeError(
                f"theta has shape {th.shape}, expected ({self.parameter_count},)"
            )
        if np.any(th <= 0.0):
            raise DomainError("all stiffness parameters must be positive")
        fixed, units = self._assembly
        k_mat = fixed + np.tensordot(th, units, axes=1)
        inv_sqrt = self._inv_sqrt_masses
        try:
            lam, y = np.linalg.eigh(inv_sqrt[:, None] * k_mat * inv_sqrt[None, :])
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
        phi = inv_sqrt[:, None] * y
        phi = phi / np.linalg.norm(phi, axis=0)
        return ModalSolution(lam, fix_signs(phi))


def _parse_endpoint(raw, where: str) -> int:
    if isinstance(raw, str):
        if raw.lower() == "ground":
            return GROUND
        raise ConfigurationError(f"{where}: endpoint must be a node index or 'ground', got {raw!r}")
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigurationError(f"{where}: endpoint must be an integer, got {raw!r}")
    return raw


def model_from_dict(data: dict, source: str = "<model>") -> StructuralModel:
    """Build a model from its JSON dictionary form, validating as it goes.

    Expected shape::

        {"masses": [...], "springs": [{"id": ..., "a": ..., "b": ...,
          "stiffness": ... | "param": ...}, ...], "parameters": d?}

    ``parameters`` is optional; when absent the count is inferred from the
    largest ``param`` reference.
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: top level must be an object")
    try:
        masses = data["masses"]
        spring_entries = data["springs"]
    except KeyError as exc:
        raise ConfigurationError(f"{source}: missing required key {exc.args[0]!r}") from exc
    if not isinstance(spring_entries, list) or not spring_entries:
        raise ConfigurationError(f"{source}: 'springs' must be a non-empty array")

    springs = []
    max_param = -1
    for pos, entry in enumerate(spring_entries):
        where = f"{source}: springs[{pos}]"
        if not isinstance(entry, dict):
            raise ConfigurationError(f"{where}: must be an object")
        sid = str(entry.get("id", f"spring{pos}"))
        where = f"{where} (id {sid!r})"
        if "a" not in entry or "b" not in entry:
            raise ConfigurationError(f"{where}: needs endpoints 'a' and 'b'")
        a = _parse_endpoint(entry["a"], where)
        b = _parse_endpoint(entry["b"], where)
        stiffness = entry.get("stiffness")
        param = entry.get("param")
        try:
            springs.append(
                SpringElement(
                    id=sid,
                    node_a=a,
                    node_b=b,
                    stiffness=None if stiffness is None else float(stiffness),
                    param_index=None if param is None else int(param),
                )
            )
        except ConfigurationError as exc:
            raise ConfigurationError(f"{where}: {exc}") from exc
        if param is not None:
            max_param = max(max_param, int(param))

    count = data.get("parameters", max_param + 1)
    try:
        return StructuralModel(masses=np.asarray(masses, dtype=float), springs=tuple(springs), parameter_count=int(count))
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc


def load_model(path) -> StructuralModel:
    """Load a model definition from a JSON file.

    Syntax errors carry the line/column from the JSON parser; semantic
    errors name the offending spring entry.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    return model_from_dict(data, source=str(path))
