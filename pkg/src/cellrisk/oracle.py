"""Independent forward Monte Carlo validation of map and search outputs.

Simulates the full hybrid system (continuous dynamics plus stochastic
configuration jumps) with no discretization. Sampling and binning are
implemented here from scratch, on purpose: agreement with the cell-based
engine is only evidence if the two share nothing but the simulator.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bpa import TopEvent
from .cellspace import EXTERIOR, CellCoord, Exterior, SpaceSpec
from .configuration import ConfigTransitionModel
from .mapper import DynamicsModel

__all__ = [
    "BoxUniform",
    "CellUniform",
    "MonteCarloConfig",
    "PointInitial",
    "empirical_transition",
    "simulate_event_probability",
]


@dataclass(frozen=True)
class PointInitial:
    x: tuple[float, ...]
    n: tuple[int, ...]


@dataclass(frozen=True)
class BoxUniform:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    n: tuple[int, ...]


@dataclass(frozen=True)
class CellUniform:
    """Uniform over one cell's box; bounds are derived locally, not imported."""

    coord: CellCoord


InitialDistribution = PointInitial | BoxUniform | CellUniform


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int
    horizon: int
    initial: InitialDistribution
    seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def _cell_box(coord: CellCoord, spec: SpaceSpec) -> tuple[list[float], list[float]]:
    lo, hi = [], []
    for l in range(spec.L):
        w = (spec.upper[l] - spec.lower[l]) / spec.partitions[l]
        a = spec.lower[l] + (coord.j[l] - 1) * w
        lo.append(a)
        hi.append(a + w)
    return lo, hi


def _draw_initial(
    initial: InitialDistribution, spec: SpaceSpec | None, rng: random.Random
) -> tuple[list[float], tuple[int, ...]]:
    if isinstance(initial, PointInitial):
        return list(initial.x), initial.n
    if isinstance(initial, BoxUniform):
        x = [
            lo + rng.random() * (hi - lo)
            for lo, hi in zip(initial.lower, initial.upper)
        ]
        return x, initial.n
    if spec is None:
        raise ValueError("cell-uniform initial distribution needs a spec")
    lo, hi = _cell_box(initial.coord, spec)
    x = [a + rng.random() * (b - a) for a, b in zip(lo, hi)]
    return x, initial.coord.n


def _jump_config(
    config_model: ConfigTransitionModel, n: tuple[int, ...], rng: random.Random
) -> tuple[int, ...]:
    out = []
    for m, state in enumerate(n):
        row = config_model.matrices[m].entries[state - 1]
        u = rng.random()
        acc = 0.0
        chosen = len(row)  # falls into the last state on rounding dust
        for k, p in enumerate(row):
            acc += float(p)
            if u < acc:
                chosen = k + 1
                break
        out.append(chosen)
    return tuple(out)


def _in_event(x: Sequence[float], n: tuple[int, ...], event: TopEvent) -> bool:
    if tuple(n) not in event.configs:
        return False
    return all(lo < v < hi for v, lo, hi in zip(x, event.lower, event.upper))


def simulate_event_probability(
    model: DynamicsModel,
    config_model: ConfigTransitionModel,
    event: TopEvent,
    mc: MonteCarloConfig,
    dt: float,
    spec: SpaceSpec | None = None,
) -> tuple[float, float]:
    """Estimate the probability of entering the event within the horizon.

    Per trial: draw an initial hybrid state, then alternate a dynamics step
    under the current configuration with a configuration jump drawn from the
    per-step matrices, flagging success the first time the state sits in the
    event box with an admissible configuration. Returns the hit fraction and
    its binomial standard error; deterministic for a given seed.
    """
    hits = 0
    for trial in range(mc.trials):
        rng = random.Random(f"{mc.seed}:{trial}")
        x, n = _draw_initial(mc.initial, spec, rng)
        for _ in range(mc.horizon):
            x = [float(v) for v in model.step(np.array(x, dtype=float), n, dt)]
            n = _jump_config(config_model, n, rng)
            if _in_event(x, n, event):
                hits += 1
                break
    p = hits / mc.trials
    se = math.sqrt(p * (1.0 - p) / mc.trials)
    return p, se


def empirical_transition(
    model: DynamicsModel,
    source_cell: CellCoord,
    spec: SpaceSpec,
    dt: float,
    trials: int,
    seed: int = 0,
) -> list[tuple[tuple[int, ...] | Exterior, Fraction]]:
    """Re-estimate one flow row with an independent sampling and binning path.

    Mirrors the quadrature definition (uniform points from the source box,
    one step under the source configuration, relative frequencies by target
    cell) without touching the engine's sampling or binning code. The
    returned frequencies sum to exactly one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    lo, hi = _cell_box(source_cell, spec)
    counts: dict[tuple[int, ...] | Exterior, int] = {}
    for _ in range(trials):
        x0 = [a + rng.random() * (b - a) for a, b in zip(lo, hi)]
        y = model.step(np.array(x0, dtype=float), source_cell.n, dt)
        target: tuple[int, ...] | Exterior
        js = []
        for l in range(spec.L):
            v = float(y[l])
            if v < spec.lower[l] or v > spec.upper[l]:
                js = []
                break
            w = (spec.upper[l] - spec.lower[l]) / spec.partitions[l]
            k = int(math.floor((v - spec.lower[l]) / w))
            if k >= spec.partitions[l]:
                k = spec.partitions[l] - 1
            js.append(k + 1)
        target = tuple(js) if js else EXTERIOR
        counts[target] = counts.get(target, 0) + 1
    ordered = sorted(
        counts.items(), key=lambda kv: (kv[0] is EXTERIOR, kv[0] if kv[0] is not EXTERIOR else ())
    )
    return [(target, Fraction(c, trials)) for target, c in ordered]
