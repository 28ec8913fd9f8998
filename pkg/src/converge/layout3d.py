"""Deterministic 3D force-directed layout for viewpoint graphs.

Connected pairs feel a spring toward a rest length that shrinks with
similarity; every pair feels an inverse-square repulsion. The simulation
stops once the largest damped displacement falls to the convergence epsilon,
then recenters the centroid at the origin. Same graph + params => identical
coordinates to the last bit.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from converge.semantics import ViewGraph

D_MIN = 1e-3  # repulsion distance floor; keeps forces finite for coincident nodes


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutParams:
    attraction_gain: float = 0.05
    repulsion_gain: float = 0.01
    rest_length_base: float = 1.0
    damping: float = 0.9
    max_iterations: int = 2000
    convergence_epsilon: float = 1e-4
    max_step: float = 0.2  # per-node displacement clip, for early-iteration stability
    seed: int = 42

    def __post_init__(self):
        if self.attraction_gain <= 0 or self.repulsion_gain <= 0:
            raise LayoutError("gains must be positive")
        if not 0 < self.damping < 1:
            raise LayoutError("damping must lie in (0, 1)")
        if self.convergence_epsilon <= 0:
            raise LayoutError("convergence epsilon must be positive")
        if self.max_iterations < 0 or self.max_step <= 0:
            raise LayoutError("max_iterations must be >= 0 and max_step > 0")

    def to_payload(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Layout:
    positions: dict[str, tuple[float, float, float]]
    iterations_used: int
    final_residual: float
    converged: bool
    params: LayoutParams

    def to_payload(self) -> dict:
        return {
            "positions": {vid: list(pos) for vid, pos in self.positions.items()},
            "iterations_used": self.iterations_used,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "params": self.params.to_payload(),
        }


def run_layout(graph: ViewGraph, params: LayoutParams = LayoutParams()) -> Layout:
    """Simulate to force equilibrium. Node order is sorted by id so the result
    is independent of graph construction order."""
    node_ids = sorted(node.id for node in graph.nodes)
    if not node_ids:
        raise LayoutError("layout requires a non-empty graph")
    index = {vid: i for i, vid in enumerate(node_ids)}
    n = len(node_ids)

    # rest-length matrix for connected pairs; NaN marks "no spring"
    rest = np.full((n, n), np.nan)
    for edge in graph.edges:
        i, j = index[edge.source], index[edge.target]
        length = params.rest_length_base * (1.0 - edge.weight)
        rest[i, j] = rest[j, i] = length
    spring_mask = ~np.isnan(rest)
    rest_filled = np.where(spring_mask, rest, 0.0)

    rng = np.random.default_rng(params.seed)
    positions = rng.uniform(-1.0, 1.0, size=(n, 3))

    iterations = 0
    residual = 0.0
    converged = False
    for _ in range(params.max_iterations):
        delta = positions[None, :, :] - positions[:, None, :]  # delta[i][j] = x_j - x_i
        dist = np.linalg.norm(delta, axis=2)
        clamped = np.maximum(dist, D_MIN)
        np.fill_diagonal(clamped, 1.0)  # self-terms masked out below
        unit = delta / clamped[:, :, None]

        magnitude = np.zeros((n, n))
        magnitude += np.where(spring_mask, params.attraction_gain * (dist - rest_filled), 0.0)
        magnitude -= params.repulsion_gain / clamped**2
        np.fill_diagonal(magnitude, 0.0)
        force = (magnitude[:, :, None] * unit).sum(axis=1)
        if not np.all(np.isfinite(force)):
            bad = [node_ids[i] for i in np.flatnonzero(~np.isfinite(force).all(axis=1))]
            raise LayoutError(f"non-finite force on nodes {bad}")

        step = params.damping * force
        step_norm = np.linalg.norm(step, axis=1)
        over = step_norm > params.max_step
        if np.any(over):
            step[over] *= (params.max_step / step_norm[over])[:, None]
            step_norm = np.minimum(step_norm, params.max_step)
        residual = float(step_norm.max())
        if residual <= params.convergence_epsilon:
            converged = True
            break
        positions = positions + step
        iterations += 1
    else:
        converged = residual <= params.convergence_epsilon

    positions = positions - positions.mean(axis=0)
    placed = {
        vid: (float(positions[i, 0]), float(positions[i, 1]), float(positions[i, 2]))
        for vid, i in index.items()
    }
    return Layout(
        positions=placed,
        iterations_used=iterations,
        final_residual=residual,
        converged=converged,
        params=params,
    )


def pair_distance(layout: Layout, id_a: str, id_b: str) -> float:
    a = np.array(layout.positions[id_a])
    b = np.array(layout.positions[id_b])
    return float(np.linalg.norm(a - b))


def two_node_equilibrium(params: LayoutParams) -> float:
    """Closed-form rest distance of two nodes joined by a similarity-1 edge
    (rest length 0): spring pull k_a*d balances repulsion k_r/d^2."""
    return float((params.repulsion_gain / params.attraction_gain) ** (1.0 / 3.0))
