"""Discretized hybrid state space: cells, coordinates, flat ids, sampling.

The complete space is the cross product of a uniformly partitioned box in
R^L (one interval per continuous dimension) and the finite configuration
space of M components. A cell is one box element paired with one
configuration vector. Indices are 1-based in coordinates, 0-based in the
flat id encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EXTERIOR",
    "EXTERIOR_ID",
    "CellCoord",
    "Exterior",
    "SpaceSpecError",
    "SpaceSpec",
    "SpecMismatchError",
    "StatePoint",
    "bounds_of",
    "cell_of",
    "coord_to_id",
    "id_to_coord",
    "sample_cell",
    "sample_cell_array",
]

DEFAULT_CELL_CAP = 10_000_000


class SpaceSpecError(ValueError):
    """Raised when a space specification violates its invariants."""


class SpecMismatchError(ValueError):
    """Raised when a point, coordinate or id does not belong to the spec."""


class Exterior:
    """Singleton sentinel for states outside the declared bounds."""

    _instance: Exterior | None = None

    def __new__(cls) -> Exterior:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EXTERIOR"


EXTERIOR = Exterior()

# Flat-id marker for the exterior sink in edge lists and on-disk formats.
EXTERIOR_ID = -1


@dataclass(frozen=True)
class SpaceSpec:
    """Geometry of the discretization.

    upper/lower bound the continuous box, partitions gives the interval
    count per continuous dimension, states the state count per component.
    """

    names_x: tuple[str, ...]
    names_n: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    partitions: tuple[int, ...]
    states: tuple[int, ...]
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "names_x", tuple(self.names_x))
        object.__setattr__(self, "names_n", tuple(self.names_n))
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "partitions", tuple(int(v) for v in self.partitions))
        object.__setattr__(self, "states", tuple(int(v) for v in self.states))
        L = len(self.lower)
        if not (len(self.upper) == len(self.partitions) == len(self.names_x) == L):
            raise SpaceSpecError("continuous field lengths disagree")
        if len(self.names_n) != len(self.states):
            raise SpaceSpecError("component field lengths disagree")
        for l in range(L):
            if not (math.isfinite(self.lower[l]) and math.isfinite(self.upper[l])):
                raise SpaceSpecError(f"non-finite bound in dimension {l}")
            if not self.lower[l] < self.upper[l]:
                raise SpaceSpecError(
                    f"dimension {l}: lower bound {self.lower[l]} must be < upper {self.upper[l]}"
                )
            if self.partitions[l] < 1:
                raise SpaceSpecError(f"dimension {l}: partition count must be >= 1")
        for m, n_m in enumerate(self.states):
            if n_m < 1:
                raise SpaceSpecError(f"component {m}: state count must be >= 1")
        if self.total_cells > self.cell_cap:
            raise SpaceSpecError(
                f"total cell count {self.total_cells} exceeds cap {self.cell_cap}"
            )

    @property
    def L(self) -> int:
        return len(self.lower)

    @property
    def M(self) -> int:
        return len(self.states)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(
            (self.upper[l] - self.lower[l]) / self.partitions[l] for l in range(self.L)
        )

    @property
    def total_continuous_cells(self) -> int:
        return math.prod(self.partitions)

    @property
    def total_configs(self) -> int:
        return math.prod(self.states)

    @property
    def total_cells(self) -> int:
        return self.total_continuous_cells * self.total_configs

    def radices(self) -> tuple[int, ...]:
        """Mixed-radix digits, dimension 1 fastest-varying, components last."""
        return self.partitions + self.states

    def validate_config(self, n: tuple[int, ...]) -> None:
        if len(n) != self.M:
            raise SpecMismatchError(f"configuration length {len(n)} != M={self.M}")
        for m, n_m in enumerate(n):
            if not 1 <= n_m <= self.states[m]:
                raise SpecMismatchError(
                    f"component {m}: state {n_m} outside 1..{self.states[m]}"
                )

    def all_coords(self):
        """Iterate every cell coordinate in flat-id order."""
        for cid in range(self.total_cells):
            yield id_to_coord(cid, self)


@dataclass(frozen=True)
class CellCoord:
    """1-based cell coordinate: continuous part j, configuration part n."""

    j: tuple[int, ...]
    n: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "j", tuple(int(v) for v in self.j))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))

    def validate(self, spec: SpaceSpec) -> None:
        if len(self.j) != spec.L:
            raise SpecMismatchError(f"coordinate has {len(self.j)} dims, spec has {spec.L}")
        for l, j_l in enumerate(self.j):
            if not 1 <= j_l <= spec.partitions[l]:
                raise SpecMismatchError(
                    f"dimension {l}: index {j_l} outside 1..{spec.partitions[l]}"
                )
        spec.validate_config(self.n)

    def as_vector(self) -> tuple[int, ...]:
        return self.j + self.n


@dataclass(eq=False)
class StatePoint:
    """Continuous state x paired with a configuration vector n."""

    x: np.ndarray
    n: tuple[int, ...]

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.n = tuple(int(v) for v in self.n)


def cell_of(point: StatePoint, spec: SpaceSpec) -> CellCoord | Exterior:
    """Locate the cell containing a point, or EXTERIOR if out of bounds.

    Boxes are half-open below and open above except the top interval of
    each dimension, which is closed so the upper bound itself is
    representable.
    """
    spec.validate_config(point.n)
    x = np.asarray(point.x, dtype=float)
    if x.shape != (spec.L,):
        raise SpecMismatchError(f"point has shape {x.shape}, expected ({spec.L},)")
    if not np.all(np.isfinite(x)):
        raise SpecMismatchError("point has non-finite coordinates")
    j = []
    for l in range(spec.L):
        lo, hi = spec.lower[l], spec.upper[l]
        if x[l] < lo or x[l] > hi:
            return EXTERIOR
        J_l = spec.partitions[l]
        w = (hi - lo) / J_l
        idx = int(math.floor((x[l] - lo) / w))
        if idx >= J_l:
            idx = J_l - 1  # top interval closed above
        j.append(idx + 1)
    return CellCoord(tuple(j), point.n)


def bounds_of(cell: CellCoord, spec: SpaceSpec) -> tuple[np.ndarray, np.ndarray]:
    """Box of a cell as (lower, upper) vectors; volume is prod(upper - lower)."""
    cell.validate(spec)
    w = np.array(spec.widths)
    lo = np.array(spec.lower) + (np.array(cell.j) - 1) * w
    return lo, lo + w


def sample_cell_array(
    cell: CellCoord, spec: SpaceSpec, count: int, seed: int | np.random.SeedSequence
) -> np.ndarray:
    """Uniform points from the cell box as a (count, L) array."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo, hi = bounds_of(cell, spec)
    rng = np.random.default_rng(seed)
    return lo + rng.random((count, spec.L)) * (hi - lo)


def sample_cell(
    cell: CellCoord, spec: SpaceSpec, count: int, seed: int | np.random.SeedSequence
) -> list[StatePoint]:
    """Draw points independently and uniformly from the cell box.

    Deterministic for a given seed; every point carries the cell's n.
    """
    xs = sample_cell_array(cell, spec, count, seed)
    return [StatePoint(x, cell.n) for x in xs]


def coord_to_id(coord: CellCoord, spec: SpaceSpec) -> int:
    """Flatten a coordinate to 0-based id, dimension 1 fastest-varying."""
    coord.validate(spec)
    digits = [v - 1 for v in coord.as_vector()]
    cid = 0
    for digit, radix in zip(reversed(digits), reversed(spec.radices())):
        cid = cid * radix + digit
    return cid


def id_to_coord(cid: int, spec: SpaceSpec) -> CellCoord:
    """Inverse of coord_to_id."""
    if not 0 <= cid < spec.total_cells:
        raise SpecMismatchError(f"id {cid} outside 0..{spec.total_cells - 1}")
    digits = []
    rem = cid
    for radix in spec.radices():
        digits.append(rem % radix + 1)
        rem //= radix
    L = spec.L
    return CellCoord(tuple(digits[:L]), tuple(digits[L:]))
