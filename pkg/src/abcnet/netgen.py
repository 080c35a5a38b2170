"""Synthetic population networks with distance-decay attachment.

Nodes live in the unit square; edges are formed sequentially, the target
chosen with probability proportional to D^(-gamma) over eligible nodes.
An infection flag is seeded before any edge exists and can transmit
across each edge once, at formation time.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from abcnet.priors import ParameterSet, PriorSpec, draw_parameters  # noqa: F401

# Coincident points are a probability-zero event for continuous positions;
# the floor only guards exact floating-point collisions without overflowing
# D**(-gamma) for the gamma ranges in use.
MIN_DISTANCE = 1e-12

# Per-source weight rows are cached; cap total cached floats so huge
# populations do not exhaust memory.
_CACHE_BUDGET = 30_000_000


@dataclass(frozen=True)
class PopulationParams:
    """The five generator parameters."""

    avg_degree: float
    n_nodes: int
    p_infect: float       # initial infection proportion
    p_transmit: float     # per-edge transmission chance
    gamma: float          # distance-decay exponent

    def __post_init__(self):
        if self.avg_degree < 0:
            raise ValueError(f"avg_degree must be >= 0, got {self.avg_degree}")
        if self.n_nodes < 2:
            raise ValueError(f"n_nodes must be >= 2, got {self.n_nodes}")
        if not 0 <= self.p_infect <= 1:
            raise ValueError(f"p_infect must be in [0,1], got {self.p_infect}")
        if not 0 <= self.p_transmit <= 1:
            raise ValueError(f"p_transmit must be in [0,1], got {self.p_transmit}")


class PopulationGraph:
    """Undirected simple graph with spatial positions and infection flags."""

    def __init__(self, positions: np.ndarray, infected: np.ndarray):
        self.positions = np.asarray(positions, dtype=float)
        self.infected = np.asarray(infected, dtype=bool)
        n = len(self.positions)
        self.adjacency: list[set[int]] = [set() for _ in range(n)]
        self.edges: list[tuple[int, int]] = []

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adjacency[a]

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("self-loops are not allowed")
        if b in self.adjacency[a]:
            raise ValueError(f"duplicate edge ({a}, {b})")
        self.adjacency[a].add(b)
        self.adjacency[b].add(a)
        self.edges.append((a, b))

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.adjacency], dtype=int)

    def write_csv(self, directory: str) -> None:
        """Debug serialization: nodes.csv and edges.csv."""
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "nodes.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x", "y", "infected"])
            for i in range(self.n_nodes):
                w.writerow([i, repr(self.positions[i, 0]), repr(self.positions[i, 1]),
                            int(self.infected[i])])
        with open(os.path.join(directory, "edges.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id_a", "id_b"])
            for a, b in sorted((min(e), max(e)) for e in self.edges):
                w.writerow([a, b])


def attachment_weights(positions: np.ndarray, source: int, gamma: float) -> np.ndarray:
    """Raw target weights D^(-gamma) from `source`; the source itself gets 0."""
    diff = positions - positions[source]
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    np.maximum(d, MIN_DISTANCE, out=d)
    w = d ** (-gamma) if gamma != 0 else np.ones_like(d)
    w[source] = 0.0
    return w


def generate_population(params: PopulationParams, rng: np.random.Generator) -> PopulationGraph:
    """Generate one population graph under `params`.

    Raises ValueError when the requested edge count cannot fit in a
    simple graph on n_nodes nodes.
    """
    n = params.n_nodes
    n_edges = int(round(params.avg_degree * n / 2.0))
    if n_edges > n * (n - 1) // 2:
        raise ValueError(
            f"cannot place {n_edges} simple edges among {n} nodes"
        )

    positions = rng.random((n, 2))
    infected = rng.random(n) < params.p_infect
    graph = PopulationGraph(positions, infected)
    if n_edges == 0:
        return graph

    adjacency = graph.adjacency
    alpha = params.p_transmit
    gamma = params.gamma
    max_deg = n - 1

    if gamma == 0.0:
        # Uniform target choice: rejection on batched integer draws.
        size = 8192
        buf = rng.integers(0, n, size=size).tolist()
        pos = 0
        for _ in range(n_edges):
            while True:
                if pos == size:
                    buf = rng.integers(0, n, size=size).tolist()
                    pos = 0
                src = buf[pos]
                pos += 1
                if len(adjacency[src]) < max_deg:
                    break
            nbrs = adjacency[src]
            while True:
                if pos == size:
                    buf = rng.integers(0, n, size=size).tolist()
                    pos = 0
                tgt = buf[pos]
                pos += 1
                if tgt != src and tgt not in nbrs:
                    break
            _form_edge(graph, src, tgt, alpha, rng)
        return graph

    cache: dict[int, np.ndarray] = {}
    cache_rows = max(1, _CACHE_BUDGET // n)
    for _ in range(n_edges):
        while True:
            src = int(rng.integers(0, n))
            if len(adjacency[src]) < max_deg:
                break
        w = cache.get(src)
        if w is None:
            w = attachment_weights(positions, src, gamma)
            if len(cache) < cache_rows:
                cache[src] = w
        if adjacency[src]:
            w = w.copy()
            w[list(adjacency[src])] = 0.0
        cum = np.cumsum(w)
        total = cum[-1]
        tgt = int(np.searchsorted(cum, rng.random() * total, side="right"))
        while tgt >= len(w) or w[tgt] == 0.0:  # fp edge of the cumsum
            tgt -= 1
        _form_edge(graph, src, tgt, alpha, rng)
    return graph


def _form_edge(graph: PopulationGraph, a: int, b: int, alpha: float, rng) -> None:
    graph.add_edge(a, b)
    if alpha > 0.0 and graph.infected[a] != graph.infected[b]:
        if rng.random() < alpha:
            graph.infected[a] = True
            graph.infected[b] = True
