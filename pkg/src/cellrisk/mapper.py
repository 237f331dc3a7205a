"""Single-step transition map construction over a pluggable simulator.

For every source cell the continuous flow is estimated by equal-weight
quadrature: points are sampled uniformly from the cell box, stepped through
the simulator under the source configuration, and binned by target cell.
The joint edge probability is the product of that flow term and the
configuration jump probability. A backward (transpose) index supports
predecessor queries during backtracking.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .cellspace import (
    EXTERIOR,
    EXTERIOR_ID,
    CellCoord,
    Exterior,
    SpaceSpec,
    coord_to_id,
    id_to_coord,
    sample_cell_array,
)
from .configuration import ConfigTransitionModel, validate as validate_config

__all__ = [
    "BuildError",
    "BudgetError",
    "DynamicsModel",
    "MapFormatError",
    "TransitionMap",
    "build_map",
    "estimate_g",
    "forward_step",
    "load_map",
    "predecessors",
    "save_map",
]

ROW_SUM_TOL = 1e-9
DEFAULT_SAMPLES_PER_CELL = 200
DEFAULT_SAMPLE_BUDGET = 100_000_000

MAP_FORMAT = "cellrisk-transition-map"
MAP_FORMAT_VERSION = 1


class BuildError(RuntimeError):
    """Raised when the simulator produces unusable states during a build."""


class BudgetError(RuntimeError):
    """Raised when a build or search would exceed its configured budget."""


class MapFormatError(ValueError):
    """Raised when a persisted map file cannot be parsed or fails checks."""


class DynamicsModel:
    """One-step deterministic dynamics under a fixed configuration.

    step() must be a pure function of its arguments; any stochastic
    disturbance belongs in the sampled initial points, not in here.
    Subclasses may override step_many with a vectorized implementation.
    """

    name = "unnamed"

    def step(self, x: np.ndarray, n: tuple[int, ...], dt: float) -> np.ndarray:
        raise NotImplementedError

    def step_many(self, xs: np.ndarray, n: tuple[int, ...], dt: float) -> np.ndarray:
        return np.stack([self.step(x, n, dt) for x in xs])


@dataclass(frozen=True)
class MapMetadata:
    seed: int
    simulator: str
    built_at: float = 0.0  # wall-clock; in-memory only, never serialized


@dataclass
class TransitionMap:
    """Sparse single-step map with forward and transpose indices.

    forward maps source id -> [(target id or EXTERIOR_ID, q), ...] sorted by
    target id; backward maps target id -> [(source id, q), ...] sorted by
    descending q then ascending source id. Only q > 0 edges are stored.
    """

    spec: SpaceSpec
    dt: float
    samples_per_cell: int
    forward: dict[int, list[tuple[int, float]]]
    backward: dict[int, list[tuple[int, float]]]
    metadata: MapMetadata
    _matrix_cache: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    @property
    def n_cells(self) -> int:
        return self.spec.total_cells

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.forward.values())

    def exterior_mass(self, source: int) -> float:
        return sum(q for t, q in self.forward.get(source, []) if t == EXTERIOR_ID)

    def total_exterior_mass(self) -> float:
        return sum(
            q for edges in self.forward.values() for t, q in edges if t == EXTERIOR_ID
        )

    def row_sum(self, source: int) -> float:
        return sum(q for _, q in self.forward.get(source, []))

    def as_matrix(self) -> sp.csr_matrix:
        """(C+1) x (C+1) row-stochastic matrix, exterior as absorbing last row."""
        if self._matrix_cache is None:
            C = self.n_cells
            rows, cols, vals = [], [], []
            for s, edges in self.forward.items():
                for t, q in edges:
                    rows.append(s)
                    cols.append(C if t == EXTERIOR_ID else t)
                    vals.append(q)
            rows.append(C)
            cols.append(C)
            vals.append(1.0)
            self._matrix_cache = sp.csr_matrix(
                (vals, (rows, cols)), shape=(C + 1, C + 1)
            )
        return self._matrix_cache

    @classmethod
    def from_edges(
        cls,
        spec: SpaceSpec,
        edges: dict[int, list[tuple[int, float]]],
        dt: float = 1.0,
        samples_per_cell: int = 0,
        simulator: str = "analytic",
        seed: int = 0,
        check: bool = True,
    ) -> TransitionMap:
        """Build a map directly from explicit edge lists (tests, synthetics)."""
        forward: dict[int, list[tuple[int, float]]] = {}
        for s, row in edges.items():
            kept = [(t, float(q)) for t, q in row if q > 0.0]
            kept.sort(key=lambda e: e[0])
            forward[s] = kept
            if check:
                total = sum(q for _, q in kept)
                if abs(total - 1.0) > ROW_SUM_TOL:
                    raise MapFormatError(f"source {s}: row sums to {total!r}")
        tm = cls(
            spec=spec,
            dt=dt,
            samples_per_cell=samples_per_cell,
            forward=forward,
            backward=_transpose(forward),
            metadata=MapMetadata(seed=seed, simulator=simulator, built_at=time.time()),
        )
        return tm


def _transpose(forward: dict[int, list[tuple[int, float]]]) -> dict[int, list[tuple[int, float]]]:
    backward: dict[int, list[tuple[int, float]]] = {}
    for s, edges in forward.items():
        for t, q in edges:
            if t == EXTERIOR_ID:
                continue
            backward.setdefault(t, []).append((s, q))
    for t in backward:
        backward[t].sort(key=lambda e: (-e[1], e[0]))
    return backward


def _source_seed(seed: int, source_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(source_id,))


def estimate_g(
    source_cell: CellCoord,
    model: DynamicsModel,
    spec: SpaceSpec,
    dt: float,
    samples: int,
    seed: int,
) -> list[tuple[tuple[int, ...] | Exterior, Fraction]]:
    """Equal-weight quadrature estimate of the continuous flow from one cell.

    Returns (target j-coordinate or EXTERIOR, count/samples) pairs sorted by
    flattened target index with the exterior entry last; the fractions sum
    to exactly one.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    source_cell.validate(spec)
    source_id = coord_to_id(source_cell, spec)
    xs = sample_cell_array(source_cell, spec, samples, _source_seed(seed, source_id))
    ys = np.asarray(model.step_many(xs, source_cell.n, dt), dtype=float)
    if ys.shape != xs.shape:
        raise BuildError(
            f"simulator returned shape {ys.shape} for cell {source_cell}, expected {xs.shape}"
        )
    bad = ~np.isfinite(ys).all(axis=1)
    if bad.any():
        k = int(np.argmax(bad))
        raise BuildError(
            f"simulator returned non-finite state from cell {source_cell} "
            f"(sample {k}: {xs[k].tolist()} -> {ys[k].tolist()})"
        )

    lower = np.array(spec.lower)
    upper = np.array(spec.upper)
    widths = np.array(spec.widths)
    parts = np.array(spec.partitions)

    inside = np.all((ys >= lower) & (ys <= upper), axis=1)
    idx = np.floor((ys - lower) / widths).astype(np.int64)
    np.minimum(idx, parts - 1, out=idx)  # top interval closed above

    # Flatten continuous indices, dimension 1 fastest-varying.
    strides = np.cumprod(np.concatenate(([1], parts[:-1])))
    flat_j = idx @ strides

    counts: dict[int, int] = {}
    exterior_count = 0
    for k in range(samples):
        if inside[k]:
            fj = int(flat_j[k])
            counts[fj] = counts.get(fj, 0) + 1
        else:
            exterior_count += 1

    out: list[tuple[tuple[int, ...] | Exterior, Fraction]] = []
    for fj in sorted(counts):
        digits = []
        rem = fj
        for radix in spec.partitions:
            digits.append(rem % radix + 1)
            rem //= radix
        out.append((tuple(digits), Fraction(counts[fj], samples)))
    if exterior_count:
        out.append((EXTERIOR, Fraction(exterior_count, samples)))
    return out


def _build_rows(
    model: DynamicsModel,
    spec: SpaceSpec,
    config_model: ConfigTransitionModel,
    dt: float,
    samples: int,
    seed: int,
    source_ids: list[int],
) -> dict[int, list[tuple[int, float]]]:
    """Quadrature rows for a block of source cells (worker unit)."""
    cfg_strides = np.cumprod(np.concatenate(([1], np.array(spec.states[:-1], dtype=np.int64))))
    n_j = spec.total_continuous_cells
    rows: dict[int, list[tuple[int, float]]] = {}
    for sid in source_ids:
        coord = id_to_coord(sid, spec)
        g_list = estimate_g(coord, model, spec, dt, samples, seed)
        edges: list[tuple[int, float]] = []
        for target_j, g in g_list:
            if target_j is EXTERIOR:
                # The exterior sink absorbs whole trajectories; the
                # configuration jump is irrelevant there.
                edges.append((EXTERIOR_ID, float(g)))
                continue
            g_f = float(g)
            flat_j = 0
            for d, radix in zip(reversed(target_j), reversed(spec.partitions)):
                flat_j = flat_j * radix + (d - 1)
            for n_next, h_val in _config_rows(config_model, coord.n, coord.j, target_j):
                q = h_val * g_f
                if q > 0.0:
                    flat_n = int(np.dot([v - 1 for v in n_next], cfg_strides))
                    edges.append((flat_j + n_j * flat_n, q))
        edges.sort(key=lambda e: e[0])
        rows[sid] = edges
    return rows


def _config_rows(
    config_model: ConfigTransitionModel,
    n_prev: tuple[int, ...],
    j_prev: tuple[int, ...],
    j_next: tuple[int, ...],
) -> list[tuple[tuple[int, ...], float]]:
    """All (n_next, h) pairs with h > 0 from one configuration row."""
    options: list[list[tuple[int, float]]] = []
    for m in range(config_model.M):
        mat = config_model.matrix_for(m, j_prev, j_next)
        row = mat[n_prev[m] - 1]
        options.append([(k + 1, float(p)) for k, p in enumerate(row) if p > 0.0])
    combos: list[tuple[tuple[int, ...], float]] = [((), 1.0)]
    for opts in options:
        combos = [(n + (state,), p * pm) for n, p in combos for state, pm in opts]
    return combos


def build_map(
    model: DynamicsModel,
    spec: SpaceSpec,
    config_model: ConfigTransitionModel,
    dt: float,
    samples: int = DEFAULT_SAMPLES_PER_CELL,
    seed: int = 0,
    workers: int = 1,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
) -> TransitionMap:
    """Sweep every source cell and assemble the joint transition map.

    Per-source random streams are derived from the build seed and source id,
    so results are identical for any worker count.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    issues = validate_config(config_model)
    if issues:
        raise BuildError("configuration model invalid: " + "; ".join(issues))
    if config_model.sizes != spec.states:
        raise BuildError(
            f"configuration sizes {config_model.sizes} do not match spec states {spec.states}"
        )
    total = spec.total_cells * samples
    if total > sample_budget:
        raise BudgetError(
            f"{spec.total_cells} cells x {samples} samples = {total} simulations "
            f"exceeds budget {sample_budget}"
        )

    all_ids = list(range(spec.total_cells))
    if workers <= 1:
        forward = _build_rows(model, spec, config_model, dt, samples, seed, all_ids)
    else:
        chunk = math.ceil(len(all_ids) / workers)
        blocks = [all_ids[i : i + chunk] for i in range(0, len(all_ids), chunk)]
        forward = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_build_rows, model, spec, config_model, dt, samples, seed, b)
                for b in blocks
            ]
            for fut in futures:
                forward.update(fut.result())

    for sid, edges in forward.items():
        total_q = sum(q for _, q in edges)
        if abs(total_q - 1.0) > ROW_SUM_TOL:
            raise BuildError(f"source {sid}: outgoing mass {total_q!r} != 1")

    return TransitionMap(
        spec=spec,
        dt=dt,
        samples_per_cell=samples,
        forward=forward,
        backward=_transpose(forward),
        metadata=MapMetadata(seed=seed, simulator=model.name, built_at=time.time()),
    )


def forward_step(tmap: TransitionMap, distribution: np.ndarray) -> np.ndarray:
    """Push a distribution one step forward; exterior (last entry) absorbs.

    Accepts a vector over cells, or cells plus exterior; always returns the
    cells-plus-exterior form.
    """
    C = tmap.n_cells
    dist = np.asarray(distribution, dtype=float)
    if dist.shape == (C,):
        dist = np.concatenate([dist, [0.0]])
    elif dist.shape != (C + 1,):
        raise ValueError(f"distribution must have length {C} or {C + 1}")
    total = float(dist.sum())
    if abs(total - 1.0) > ROW_SUM_TOL:
        raise ValueError(f"distribution sums to {total!r}, expected 1")
    out = dist @ tmap.as_matrix()
    return np.asarray(out).ravel()


def predecessors(tmap: TransitionMap, target: int) -> list[tuple[int, float]]:
    """Sources with stored edges into a target cell, descending q.

    Ties break by ascending source id; an empty list means no inbound flow.
    """
    if not 0 <= target < tmap.n_cells:
        raise ValueError(f"target id {target} outside 0..{tmap.n_cells - 1}")
    return list(tmap.backward.get(target, []))


def _spec_to_dict(spec: SpaceSpec) -> dict:
    return {
        "names_x": list(spec.names_x),
        "names_n": list(spec.names_n),
        "lower": list(spec.lower),
        "upper": list(spec.upper),
        "partitions": list(spec.partitions),
        "states": list(spec.states),
    }


def _spec_from_dict(d: dict) -> SpaceSpec:
    return SpaceSpec(
        names_x=tuple(d["names_x"]),
        names_n=tuple(d["names_n"]),
        lower=tuple(d["lower"]),
        upper=tuple(d["upper"]),
        partitions=tuple(d["partitions"]),
        states=tuple(d["states"]),
    )


def save_map(tmap: TransitionMap, path: str) -> None:
    """Persist a map as versioned JSON.

    Layout: format/version header, spec echo, build parameters, then the
    edge list as [source id, target id, q] triples with -1 marking the
    exterior sink. Floats are written with shortest round-trip repr, so a
    load followed by a save is byte-identical. Wall-clock metadata is
    deliberately excluded to keep rebuilds with equal seeds byte-identical.
    """
    edges = []
    for s in sorted(tmap.forward):
        for t, q in tmap.forward[s]:
            edges.append([s, t, q])
    doc = {
        "format": MAP_FORMAT,
        "version": MAP_FORMAT_VERSION,
        "spec": _spec_to_dict(tmap.spec),
        "dt": tmap.dt,
        "samples_per_cell": tmap.samples_per_cell,
        "seed": tmap.metadata.seed,
        "simulator": tmap.metadata.simulator,
        "edges": edges,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_map(path: str) -> TransitionMap:
    """Load a map persisted by save_map, re-deriving the backward index."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MAP_FORMAT:
        raise MapFormatError(f"{path}: not a transition map file")
    if doc.get("version") != MAP_FORMAT_VERSION:
        raise MapFormatError(f"{path}: unsupported version {doc.get('version')}")
    spec = _spec_from_dict(doc["spec"])
    forward: dict[int, list[tuple[int, float]]] = {}
    for s, t, q in doc["edges"]:
        forward.setdefault(int(s), []).append((int(t), float(q)))
    for s in forward:
        forward[s].sort(key=lambda e: e[0])
    return TransitionMap(
        spec=spec,
        dt=float(doc["dt"]),
        samples_per_cell=int(doc["samples_per_cell"]),
        forward=forward,
        backward=_transpose(forward),
        metadata=MapMetadata(
            seed=int(doc["seed"]), simulator=doc["simulator"], built_at=0.0
        ),
    )
