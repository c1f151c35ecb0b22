"""Uniform 1D grid and per-compartment nodal fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, LayoutError
from ..kinetics import Model


@dataclass(frozen=True)
class Grid1D:
    """Mx+1 equidistant nodes x_j = j * dx on [0, length]."""

    length: float = 2.0
    mx: int = 40

    def __post_init__(self):
        if self.length <= 0.0:
            raise DomainError(f"grid length must be > 0, got {self.length}")
        if int(self.mx) != self.mx or self.mx < 4:
            raise DomainError(f"mx must be an integer >= 4, got {self.mx}")

    @property
    def dx(self) -> float:
        return self.length / self.mx

    @property
    def npoints(self) -> int:
        return self.mx + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.mx + 1) * self.dx

    @property
    def weights(self) -> np.ndarray:
        """Composite-trapezoid quadrature weights."""
        w = np.full(self.mx + 1, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def integrate(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.mx + 1,):
            raise LayoutError(f"expected {self.mx + 1} nodal values, got shape {u.shape}")
        return float(self.weights @ u)


class Field:
    """Nodal values of every compartment at one instant.

    data has shape (ncomp, mx + 1), C-contiguous float64; row order follows
    Model.labels.
    """

    __slots__ = ("grid", "model", "data", "t")

    def __init__(self, grid: Grid1D, model: Model, data: np.ndarray, t: float = 0.0):
        data = np.ascontiguousarray(data, dtype=float)
        if data.shape != (model.ncomp, grid.mx + 1):
            raise LayoutError(
                f"field data must have shape {(model.ncomp, grid.mx + 1)}, "
                f"got {data.shape}")
        self.grid = grid
        self.model = model
        self.data = data
        self.t = float(t)

    @classmethod
    def homogeneous(cls, grid: Grid1D, model: Model, values, t: float = 0.0) -> "Field":
        values = tuple(float(v) for v in values)
        if len(values) != model.ncomp:
            raise LayoutError(
                f"{model.value} layout needs {model.ncomp} values, got {len(values)}")
        data = np.repeat(np.asarray(values)[:, None], grid.mx + 1, axis=1)
        return cls(grid, model, data, t)

    def copy(self) -> "Field":
        return Field(self.grid, self.model, self.data.copy(), self.t)

    def compartment(self, label: str) -> np.ndarray:
        try:
            row = self.model.labels.index(label)
        except ValueError:
            raise LayoutError(
                f"no compartment {label!r} in the {self.model.value} model") from None
        return self.data[row]

    def min_value(self) -> float:
        return float(self.data.min())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())
