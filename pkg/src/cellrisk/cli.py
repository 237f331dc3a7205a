"""Command-line orchestration: config parsing, map builds, searches, reports.

The configuration file is YAML keyed by the discretization's natural field
names (numProcessVariables, variableUpperBounds, ...) so a tabular system
description transcribes directly; artifact-level settings (simulator, dt,
seed, ...) use snake_case keys. See the project README for the schema and
the documented exit codes.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field

import click
import numpy as np
import yaml

from . import bpa as bpa_mod
from . import configuration as config_mod
from . import mapper as mapper_mod
from . import oracle as oracle_mod
from .bpa import TopEvent, backtrack, event_cells, rank_paths, tree_to_dot, write_tree
from .cellspace import SpaceSpec, id_to_coord
from .configuration import ConfigTransitionModel, component_matrix_from_rows
from .mapper import (
    BudgetError,
    DynamicsModel,
    TransitionMap,
    build_map,
    load_map,
    save_map,
)
from .vehicle import GroundVehicleModel, make_case_study

__all__ = [
    "EXIT_OK",
    "EXIT_NO_PATHS",
    "EXIT_CONFIG_ERROR",
    "EXIT_VALIDATION_FAILURE",
    "EXIT_BUDGET_ERROR",
    "ConfigError",
    "RunConfig",
    "SIMULATORS",
    "load_config",
    "main",
]

EXIT_OK = 0
EXIT_NO_PATHS = 2
EXIT_CONFIG_ERROR = 3
EXIT_VALIDATION_FAILURE = 4
EXIT_BUDGET_ERROR = 5

REPORT_FORMAT = "cellrisk-run-report"
REPORT_FORMAT_VERSION = 1


class ConfigError(ValueError):
    """Raised with the full list of configuration problems."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _parse_number(value: object, where: str, problems: list[str]) -> float:
    """Accept plain numbers plus simple pi expressions like 'pi/3', '-pi/3'."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        sign = 1.0
        if text.startswith("-"):
            sign = -1.0
            text = text[1:]
        if text.startswith("0-"):  # tolerated "0-pi/3" spelling
            sign = -1.0
            text = text[2:]
        try:
            if text == "pi":
                return sign * math.pi
            if text.startswith("pi/"):
                return sign * math.pi / float(text[3:])
            if "/" in text:
                num, den = text.split("/", 1)
                return sign * float(num) / float(den)
            return sign * float(text)
        except (ValueError, ZeroDivisionError):
            pass
    problems.append(f"{where}: cannot interpret {value!r} as a number")
    return math.nan


@dataclass
class RunConfig:
    """Normalized run configuration; all cross-field checks already applied."""

    spec: SpaceSpec
    config_model: ConfigTransitionModel
    event: TopEvent
    simulator: str
    simulator_params: dict
    dt: float
    samples_per_cell: int
    search_depth: int
    truncation: float
    seed: int
    node_budget: int
    workers: int
    sample_budget: int
    warnings: list[str] = field(default_factory=list)

    def normalized_dict(self) -> dict:
        return {
            "numProcessVariables": self.spec.L,
            "processVariablesNames": list(self.spec.names_x),
            "numSystemComponents": self.spec.M,
            "systemComponentNames": list(self.spec.names_n),
            "systemComponentStates": list(self.spec.states),
            "variableUpperBounds": list(self.spec.upper),
            "variableLowerBounds": list(self.spec.lower),
            "numberOfCells": list(self.spec.partitions),
            "sysConfTransProb": [
                [[float(v) for v in row] for row in m.entries]
                for m in self.config_model.matrices
            ],
            "eventUpperBounds": list(self.event.upper),
            "eventLowerBounds": list(self.event.lower),
            "eventConfigs": sorted(list(c) for c in self.event.configs),
            "simulator": self.simulator,
            "simulator_params": self.simulator_params,
            "dt": self.dt,
            "samples_per_cell": self.samples_per_cell,
            "search_depth": self.search_depth,
            "truncation": self.truncation,
            "seed": self.seed,
            "node_budget": self.node_budget,
            "workers": self.workers,
            "sample_budget": self.sample_budget,
        }


def _agv_factory(variant: str):
    def build(params: dict) -> DynamicsModel:
        case = make_case_study(variant)
        scenario = dataclasses.replace(case.params, **params) if params else case.params
        return GroundVehicleModel(scenario, name=f"agv-{variant}")

    return build


class LinearDriftModel(DynamicsModel):
    """Constant-velocity drift per dimension; handy demo and test simulator."""

    name = "linear-drift"

    def __init__(self, velocity):
        self.velocity = np.asarray(velocity, dtype=float)

    def step(self, x, n, dt):
        return np.asarray(x, dtype=float) + self.velocity * dt

    def step_many(self, xs, n, dt):
        return np.asarray(xs, dtype=float) + self.velocity * dt


class IdentityModel(DynamicsModel):
    """Fixed-point dynamics; every state maps to itself."""

    name = "identity"

    def step(self, x, n, dt):
        return np.asarray(x, dtype=float)

    def step_many(self, xs, n, dt):
        return np.array(xs, dtype=float)


SIMULATORS = {
    "agv-baseline": _agv_factory("baseline"),
    "agv-modified": _agv_factory("modified"),
    "linear-drift": lambda params: LinearDriftModel(params["velocity"]),
    "identity": lambda params: IdentityModel(),
}


def load_config(path: str) -> RunConfig:
    """Parse and fully validate a run configuration file.

    Every detected problem is collected and reported together rather than
    stopping at the first.
    """
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])

    problems: list[str] = []
    warnings: list[str] = []

    def need(key: str, default=None):
        if key not in raw and default is None:
            problems.append(f"missing required field {key!r}")
            return None
        return raw.get(key, default)

    L = need("numProcessVariables")
    M = need("numSystemComponents")
    names_x = need("processVariablesNames")
    names_n = need("systemComponentNames")
    states = need("systemComponentStates")
    uppers = need("variableUpperBounds")
    lowers = need("variableLowerBounds")
    cells = need("numberOfCells")
    trans = need("sysConfTransProb")
    ev_upper = need("eventUpperBounds")
    ev_lower = need("eventLowerBounds")
    simulator = need("simulator")

    dt = _parse_number(raw.get("dt", 1.0), "dt", problems)
    samples = int(raw.get("samples_per_cell", mapper_mod.DEFAULT_SAMPLES_PER_CELL))
    depth = int(raw.get("search_depth", 1))
    truncation = float(raw.get("truncation", 0.0))
    seed = int(raw.get("seed", 0))
    node_budget = int(raw.get("node_budget", bpa_mod.DEFAULT_NODE_BUDGET))
    workers = int(raw.get("workers", 1))
    sample_budget = int(raw.get("sample_budget", mapper_mod.DEFAULT_SAMPLE_BUDGET))
    sim_params = raw.get("simulator_params", {}) or {}

    if problems:
        raise ConfigError(problems)

    L, M = int(L), int(M)
    if len(names_x) != L:
        problems.append(f"processVariablesNames has {len(names_x)} entries, expected {L}")
    if len(names_n) != M:
        problems.append(f"systemComponentNames has {len(names_n)} entries, expected {M}")
    if len(states) != M:
        problems.append(f"systemComponentStates has {len(states)} entries, expected {M}")
    for key, vec in (("variableUpperBounds", uppers), ("variableLowerBounds", lowers)):
        if len(vec) != L:
            problems.append(f"{key} has {len(vec)} entries, expected {L}")

    # numberOfCells may carry a trailing configuration-count shorthand.
    partitions = list(cells)
    if len(partitions) == L + 1:
        trailing = int(partitions[-1])
        partitions = partitions[:-1]
        expected = math.prod(int(s) for s in states) if len(states) == M else None
        if expected is not None and trailing != expected:
            warnings.append(
                f"numberOfCells trailing entry {trailing} does not match the "
                f"configuration count {expected} implied by systemComponentStates"
            )
    elif len(partitions) != L:
        problems.append(
            f"numberOfCells has {len(partitions)} entries, expected {L} or {L + 1}"
        )

    upper_v = [_parse_number(v, "variableUpperBounds", problems) for v in uppers[:L]]
    lower_v = [_parse_number(v, "variableLowerBounds", problems) for v in lowers[:L]]

    if simulator not in SIMULATORS:
        problems.append(
            f"unknown simulator {simulator!r}; registered: {sorted(SIMULATORS)}"
        )
    if dt != dt or dt <= 0:
        problems.append(f"dt must be positive, got {dt}")
    if samples < 1:
        problems.append("samples_per_cell must be >= 1")
    if depth < 1:
        problems.append("search_depth must be >= 1")
    if not 0.0 <= truncation < 1.0:
        problems.append("truncation must be in [0, 1)")

    if problems:
        raise ConfigError(problems)

    try:
        spec = SpaceSpec(
            names_x=tuple(str(s) for s in names_x),
            names_n=tuple(str(s) for s in names_n),
            lower=tuple(lower_v),
            upper=tuple(upper_v),
            partitions=tuple(int(p) for p in partitions),
            states=tuple(int(s) for s in states),
        )
    except ValueError as exc:
        raise ConfigError([f"space specification: {exc}"]) from exc

    # Transition matrices: for one component a bare matrix is accepted.
    matrices_raw = trans
    if M == 1 and matrices_raw and not isinstance(matrices_raw[0][0], (list, tuple)):
        matrices_raw = [matrices_raw]
    if len(matrices_raw) != M:
        raise ConfigError(
            [f"sysConfTransProb has {len(matrices_raw)} matrices, expected {M}"]
        )
    comps = []
    for m, rows in enumerate(matrices_raw):
        try:
            comp = component_matrix_from_rows(rows, component_index=m)
        except ValueError as exc:
            raise ConfigError([f"sysConfTransProb component {m}: {exc}"]) from exc
        if comp.size != spec.states[m]:
            raise ConfigError(
                [
                    f"sysConfTransProb component {m} is {comp.size}x{comp.size}, "
                    f"expected {spec.states[m]}x{spec.states[m]}"
                ]
            )
        comps.append(comp)
    model = ConfigTransitionModel(matrices=tuple(comps))
    issues = config_mod.validate(model)
    if issues:
        raise ConfigError([f"sysConfTransProb: {msg}" for msg in issues])

    # Event bounds: L entries, or L+1 with a trailing configuration range.
    ev_u = list(ev_upper)
    ev_l = list(ev_lower)
    configs: frozenset[tuple[int, ...]] | None = None
    if "eventConfigs" in raw:
        configs = frozenset(tuple(int(v) for v in c) for c in raw["eventConfigs"])
    if len(ev_u) == L + 1 and len(ev_l) == L + 1:
        if configs is None:
            if M != 1:
                raise ConfigError(
                    ["trailing event-bound configuration shorthand needs M == 1; "
                     "use eventConfigs instead"]
                )
            lo_idx, hi_idx = int(ev_l[-1]), int(ev_u[-1])
            configs = frozenset((i,) for i in range(lo_idx, hi_idx + 1))
        ev_u, ev_l = ev_u[:-1], ev_l[:-1]
    if len(ev_u) != L or len(ev_l) != L:
        raise ConfigError(
            [f"event bounds must have {L} or {L + 1} entries, got "
             f"{len(ev_u)}/{len(ev_l)}"]
        )
    if configs is None:
        configs = frozenset(
            tuple(c) for c in np.ndindex(*spec.states)
        )
        configs = frozenset(tuple(v + 1 for v in c) for c in configs)
    ev_u_v = [_parse_number(v, "eventUpperBounds", problems) for v in ev_u]
    ev_l_v = [_parse_number(v, "eventLowerBounds", problems) for v in ev_l]
    if problems:
        raise ConfigError(problems)
    try:
        event = TopEvent(lower=tuple(ev_l_v), upper=tuple(ev_u_v), configs=configs)
        event.validate_against(spec)
    except ValueError as exc:
        raise ConfigError([f"event definition: {exc}"]) from exc

    return RunConfig(
        spec=spec,
        config_model=model,
        event=event,
        simulator=str(simulator),
        simulator_params=dict(sim_params),
        dt=float(dt),
        samples_per_cell=samples,
        search_depth=depth,
        truncation=truncation,
        seed=seed,
        node_budget=node_budget,
        workers=workers,
        sample_budget=sample_budget,
        warnings=warnings,
    )


def _make_simulator(cfg: RunConfig) -> DynamicsModel:
    return SIMULATORS[cfg.simulator](cfg.simulator_params)


def _echo_warnings(cfg: RunConfig) -> None:
    for w in cfg.warnings:
        click.echo(f"warning: {w}", err=True)


def _check_spec_match(cfg: RunConfig, tmap: TransitionMap) -> None:
    if tmap.spec != cfg.spec:
        raise ConfigError(
            ["map spec does not match config spec; rebuild the map for this config"]
        )


@click.group()
def main() -> None:
    """Cell-to-cell risk mapping and backtracking scenario search."""


@main.command("build-map")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--samples", type=int, default=None, help="Override samples per cell.")
@click.option("--workers", type=int, default=None, help="Override worker count.")
def build_map_cmd(config_path, out_path, seed, samples, workers) -> None:
    """Build the transition map for a configuration and persist it."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        for p in exc.problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    _echo_warnings(cfg)
    model = _make_simulator(cfg)
    t0 = time.perf_counter()
    try:
        tmap = build_map(
            model,
            cfg.spec,
            cfg.config_model,
            dt=cfg.dt,
            samples=samples if samples is not None else cfg.samples_per_cell,
            seed=seed if seed is not None else cfg.seed,
            workers=workers if workers is not None else cfg.workers,
            sample_budget=cfg.sample_budget,
        )
    except BudgetError as exc:
        click.echo(f"budget error: {exc}", err=True)
        sys.exit(EXIT_BUDGET_ERROR)
    elapsed = time.perf_counter() - t0
    save_map(tmap, out_path)
    click.echo(
        f"built map: {tmap.n_cells} sources, {tmap.n_edges} edges, "
        f"exterior mass {tmap.total_exterior_mass():.6g}, {elapsed:.1f}s -> {out_path}"
    )


@main.command("run-bpa")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--out-tree", type=click.Path(), default=None)
@click.option("--out-graph", type=click.Path(), default=None)
@click.option("--out-report", type=click.Path(), default=None)
@click.option("--epsilon", type=float, default=None, help="Override truncation.")
@click.option("--depth", type=int, default=None, help="Override search depth.")
@click.option("--budget", type=int, default=None, help="Override node budget.")
def run_bpa_cmd(
    config_path, map_path, out_tree, out_graph, out_report, epsilon, depth, budget
) -> None:
    """Backtrack from the Top Event and export tree, graph and report."""
    try:
        cfg = load_config(config_path)
        tmap = load_map(map_path)
        _check_spec_match(cfg, tmap)
    except ConfigError as exc:
        for p in exc.problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    _echo_warnings(cfg)
    t0 = time.perf_counter()
    try:
        tree = backtrack(
            tmap,
            cfg.event,
            depth=depth if depth is not None else cfg.search_depth,
            truncation=epsilon if epsilon is not None else cfg.truncation,
            node_budget=budget if budget is not None else cfg.node_budget,
        )
    except BudgetError as exc:
        click.echo(f"budget error: {exc}", err=True)
        sys.exit(EXIT_BUDGET_ERROR)
    search_s = time.perf_counter() - t0
    paths = rank_paths(tree)

    if out_tree:
        write_tree(tree, out_tree)
    if out_graph:
        with open(out_graph, "w", encoding="utf-8") as fh:
            fh.write(tree_to_dot(tree))
    if out_report:
        report = {
            "format": REPORT_FORMAT,
            "version": REPORT_FORMAT_VERSION,
            "config": cfg.normalized_dict(),
            "map": {
                "path": map_path,
                "sources": tmap.n_cells,
                "edges": tmap.n_edges,
                "exterior_mass": tmap.total_exterior_mass(),
                "simulator": tmap.metadata.simulator,
                "seed": tmap.metadata.seed,
            },
            "tree": {
                "nodes": tree.n_nodes,
                "paths": len(paths),
                "max_depth_reached": max((n.depth for n in tree.nodes()), default=0),
                "event_cells": len(tree.event_cell_ids),
            },
            "ranked_paths": [
                {
                    "cells": [list(c.as_vector()) for c in p.cells],
                    "steps": list(p.steps),
                    "cumulative": p.cumulative,
                    "rendered": p.render(),
                }
                for p in paths
            ],
            "timings": {"search_seconds": search_s},
        }
        with open(out_report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")

    click.echo(f"tree: {tree.n_nodes} nodes, {len(paths)} ranked paths")
    for p in paths[:10]:
        click.echo(f"  P={p.cumulative:.6g}  {p.render()}")
    if tree.n_nodes == 0:
        click.echo("no risk-significant paths lead to the Top Event")
        sys.exit(EXIT_NO_PATHS)
    sys.exit(EXIT_OK)


def _duality_selfcheck() -> list[str]:
    """Built-in backward/forward consistency check on a synthetic system."""
    failures = []
    spec = SpaceSpec(
        names_x=("x",), names_n=("c",),
        lower=(0.0,), upper=(10.0,), partitions=(10,), states=(1,),
    )
    rng = np.random.default_rng(7)
    edges = {}
    for s in range(10):
        if s >= 8:
            edges[s] = [(s, 1.0)]  # absorbing event block
            continue
        targets = sorted(rng.choice(10, size=3, replace=False))
        weights = rng.random(3)
        weights /= weights.sum()
        edges[s] = [(int(t), float(w)) for t, w in zip(targets, weights)]
    tmap = TransitionMap.from_edges(spec, edges)
    event = TopEvent(lower=(8.0,), upper=(10.0,), configs=frozenset({(1,)}))
    tree = backtrack(tmap, event, depth=3, truncation=0.0)
    for cid in range(10):
        total = tree.cumulative_for_cell(cid)
        dist = np.zeros(11)
        dist[cid] = 1.0
        fwd = bpa_mod.forward_check(tmap, tree, dist)
        if abs(total - fwd) > 1e-9:
            failures.append(
                f"duality: cell {cid} backward sum {total!r} != forward {fwd!r}"
            )
    return failures


@main.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--oracle-trials", type=int, default=2000, show_default=True)
def validate_cmd(config_path, map_path, oracle_trials) -> None:
    """Run invariant suites and oracle cross-checks; nonzero exit on failure."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        for p in exc.problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    failures: list[str] = []

    issues = config_mod.validate(cfg.config_model)
    failures += [f"config-model: {m}" for m in issues]

    try:
        tmap = load_map(map_path)
    except Exception as exc:
        click.echo(f"map load failed: {exc}", err=True)
        sys.exit(EXIT_VALIDATION_FAILURE)
    if tmap.spec != cfg.spec:
        failures.append("spec-echo: map spec differs from config spec")

    for s in sorted(tmap.forward):
        total = tmap.row_sum(s)
        if abs(total - 1.0) > mapper_mod.ROW_SUM_TOL:
            failures.append(f"stochasticity: source {s} outgoing mass {total!r}")
    # Transpose integrity.
    rebuilt = mapper_mod._transpose(tmap.forward)
    if rebuilt != tmap.backward:
        failures.append("transpose: backward index is not the forward transpose")

    failures += _duality_selfcheck()

    if not failures and cfg.simulator in SIMULATORS:
        model = _make_simulator(cfg)
        cell = id_to_coord(0, cfg.spec)
        row = mapper_mod.estimate_g(cell, model, cfg.spec, cfg.dt, oracle_trials, cfg.seed + 1)
        emp = oracle_mod.empirical_transition(
            model, cell, cfg.spec, cfg.dt, oracle_trials, cfg.seed + 2
        )
        row_d = {(t if isinstance(t, tuple) else "exterior"): float(g) for t, g in row}
        emp_d = {(t if isinstance(t, tuple) else "exterior"): float(g) for t, g in emp}
        keys = set(row_d) | set(emp_d)
        tv = 0.5 * sum(abs(row_d.get(k, 0.0) - emp_d.get(k, 0.0)) for k in keys)
        # 0.05 is calibrated for the default 2000 trials; scale with the
        # sampling standard error for other counts.
        tol = 0.05 * math.sqrt(2000.0 / oracle_trials)
        if tv > tol:
            failures.append(
                f"oracle-row: total-variation {tv:.4f} > {tol:.4f} "
                f"at {oracle_trials} trials"
            )

    if failures:
        for f in failures:
            click.echo(f"FAIL {f}", err=True)
        sys.exit(EXIT_VALIDATION_FAILURE)
    click.echo("all checks passed")
    sys.exit(EXIT_OK)


@main.command("forward-check")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--cell", "cell_id", required=True, type=int,
              help="Flat cell id carrying the initial point mass.")
@click.option("--steps", type=int, default=None, help="Horizon; defaults to search_depth.")
def forward_check_cmd(config_path, map_path, cell_id, steps) -> None:
    """Push a point mass forward and report the event-set probability."""
    try:
        cfg = load_config(config_path)
        tmap = load_map(map_path)
        _check_spec_match(cfg, tmap)
    except ConfigError as exc:
        for p in exc.problems:
            click.echo(f"config error: {p}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    k = steps if steps is not None else cfg.search_depth
    dist = np.zeros(tmap.n_cells + 1)
    dist[cell_id] = 1.0
    for _ in range(k):
        dist = mapper_mod.forward_step(tmap, dist)
    ids = sorted(event_cells(cfg.event, cfg.spec))
    prob = float(dist[ids].sum())
    click.echo(f"P(event after {k} steps | start cell {cell_id}) = {prob:.12g}")


@main.command("export")
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--out-graph", type=click.Path(), default=None)
@click.option("--out-text", type=click.Path(), default=None)
def export_cmd(tree_path, out_graph, out_text) -> None:
    """Re-export a stored scenario tree as a graph or readable text."""
    with open(tree_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != bpa_mod.TREE_FORMAT:
        click.echo(f"{tree_path} is not a scenario tree file", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    lines_out: list[str] = []
    dot_lines = [
        "digraph scenario_tree {",
        "\trankdir=RL;",
        '\tnode [shape=box, fontname="Helvetica"];',
        '\t"root" [label="TopEvent", shape=doubleoctagon];',
    ]
    counter = [0]

    def emit(node: dict, parent: str, indent: int) -> None:
        name = f"n{counter[0]}"
        counter[0] += 1
        vec = " ".join(str(v) for v in node["coord"])
        lines_out.append(
            "  " * indent
            + f"[{vec}] q={node['q']:g} cumulative={node['cumulative']:g} depth={node['depth']}"
        )
        dot_lines.append(f'\t"{name}" [label="[{vec}]\\nP={node["q"]:g}"];')
        dot_lines.append(f'\t"{name}" -> "{parent}";')
        for child in node["children"]:
            emit(child, name, indent + 1)

    for child in doc["root"]["children"]:
        emit(child, "root", 0)
    dot_lines.append("}")

    if out_graph:
        with open(out_graph, "w", encoding="utf-8") as fh:
            fh.write("\n".join(dot_lines) + "\n")
    if out_text:
        with open(out_text, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines_out) + "\n")
    if not out_graph and not out_text:
        click.echo("\n".join(lines_out))


if __name__ == "__main__":
    main()
