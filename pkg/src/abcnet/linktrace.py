"""Fixed-size link-traced sampling of a population graph.

The sampler keeps a recruitment queue. New seeds ("leaps") are drawn by
simple random sampling whenever the queue is exhausted. Every selected
node reports its full population degree; its neighbors respond
independently and join the queue. Queue entries whose node is already in
the sample are swept out before each selection and counted as redundant
links of their source.
"""

from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from abcnet.netgen import PopulationGraph

CSV_HEADER = [
    "order", "node_id", "source_id", "pop_degree", "links_reported",
    "links_responding", "links_recruited", "links_redundant",
    "infected", "x", "y", "depth",
]


@dataclass
class NodeRow:
    order_index: int
    node_id: int
    source_id: int | None          # None = leap/seed
    pop_degree: int
    links_reported: int
    links_responding: int = 0
    links_recruited: int = 0
    links_redundant: int = 0
    infected: bool = False
    x: float = 0.0
    y: float = 0.0
    depth: float | None = None     # None until node_depth(); None = undefined

    @property
    def is_leap(self) -> bool:
        return self.source_id is None


@dataclass
class SampleRecord:
    rows: list[NodeRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    @property
    def n_leaps(self) -> int:
        return sum(1 for r in self.rows if r.is_leap)

    def recruitment_edges(self) -> list[tuple[int, int]]:
        return [(r.source_id, r.node_id) for r in self.rows if not r.is_leap]


class _Entry:
    __slots__ = ("node", "source", "alive")

    def __init__(self, node, source):
        self.node = node
        self.source = source
        self.alive = True


def link_trace_sample(
    graph: PopulationGraph,
    n_samp: int,
    pr_response: float,
    rng: np.random.Generator,
    order: str = "fifo",
) -> SampleRecord:
    """Take a link-traced sample of min(n_samp, N_V) nodes.

    `order` selects the queue discipline: "fifo" explores breadth-first;
    "random-delay" assigns each queue entry an independent uniform(0,1)
    delay and explores in delay order.
    """
    if graph.n_nodes == 0:
        raise ValueError("cannot sample from an empty graph")
    if n_samp < 1:
        raise ValueError(f"n_samp must be >= 1, got {n_samp}")
    if not 0 <= pr_response <= 1:
        raise ValueError(f"pr_response must be in [0,1], got {pr_response}")
    if order not in ("fifo", "random-delay"):
        raise ValueError(f"unknown queue order: {order!r}")

    n = graph.n_nodes
    target = min(n_samp, n)
    rows: list[NodeRow] = []
    row_of: dict[int, NodeRow] = {}
    queue: deque[_Entry] = deque()
    heap: list[tuple[float, int, _Entry]] = []
    tick = 0
    # Entries that reference a node already in the sample; swept (and
    # counted redundant) before the next selection.
    stale: list[_Entry] = []
    by_node: dict[int, list[_Entry]] = {}
    use_heap = order == "random-delay"

    def pop_next() -> _Entry | None:
        if use_heap:
            while heap:
                entry = heapq.heappop(heap)[2]
                if entry.alive:
                    entry.alive = False
                    return entry
            return None
        while queue:
            entry = queue.popleft()
            if entry.alive:
                entry.alive = False
                return entry
        return None

    while len(rows) < target:
        # Step 2: sweep queue entries whose node is already sampled.
        for entry in stale:
            if entry.alive:
                entry.alive = False
                row_of[entry.source].links_redundant += 1
        stale.clear()

        entry = pop_next()
        if entry is None:
            # Step 1: leap by simple random sampling among unsampled nodes.
            while True:
                node = int(rng.integers(0, n))
                if node not in row_of:
                    break
            source = None
        else:
            node, source = entry.node, entry.source

        row = NodeRow(
            order_index=len(rows),
            node_id=node,
            source_id=source,
            pop_degree=graph.degree(node),
            links_reported=graph.degree(node),
            infected=bool(graph.infected[node]),
            x=float(graph.positions[node, 0]),
            y=float(graph.positions[node, 1]),
        )
        rows.append(row)
        row_of[node] = row
        if source is not None:
            row_of[source].links_recruited += 1
        # Pending entries for this node are now redundant.
        stale.extend(by_node.pop(node, ()))

        # Steps 4-5: neighbors respond independently and join the queue.
        nbrs = sorted(graph.adjacency[node])
        if nbrs:
            responded = rng.random(len(nbrs)) < pr_response
            for nbr, ok in zip(nbrs, responded):
                if not ok:
                    continue
                row.links_responding += 1
                e = _Entry(nbr, node)
                if use_heap:
                    heapq.heappush(heap, (float(rng.random()), tick, e))
                    tick += 1
                else:
                    queue.append(e)
                if nbr in row_of:
                    stale.append(e)
                else:
                    by_node.setdefault(nbr, []).append(e)

    return SampleRecord(rows=rows)


def node_depth(record: SampleRecord) -> SampleRecord:
    """Fill each row's depth: mean forest geodesic to its component peers.

    Depth stays undefined (None) for nodes isolated in the recruitment
    forest. The record is modified in place and returned.
    """
    index = {r.node_id: i for i, r in enumerate(record.rows)}
    n = len(record.rows)
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in record.recruitment_edges():
        ia, ib = index[a], index[b]
        adj[ia].append(ib)
        adj[ib].append(ia)

    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        if not adj[start]:
            seen[start] = True
            record.rows[start].depth = None
            continue
        # Collect the component in parent-before-child order.
        order = [start]
        parent = {start: -1}
        seen[start] = True
        for v in order:
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    order.append(w)
        k = len(order)
        # Distance sums in a tree: post-order accumulation, then re-root.
        size = {v: 1 for v in order}
        dsum = {v: 0 for v in order}
        for v in reversed(order[1:]):
            p = parent[v]
            size[p] += size[v]
            dsum[p] += dsum[v] + size[v]
        total = {start: dsum[start]}
        for v in order[1:]:
            total[v] = total[parent[v]] + k - 2 * size[v]
        for v in order:
            record.rows[v].depth = total[v] / (k - 1)
    return record


def to_long_format(record: SampleRecord) -> list[list]:
    """One row of primitives per sampled node, in sampling order."""
    out = []
    for r in record.rows:
        out.append([
            r.order_index,
            r.node_id,
            "" if r.source_id is None else r.source_id,
            r.pop_degree,
            r.links_reported,
            r.links_responding,
            r.links_recruited,
            r.links_redundant,
            int(r.infected),
            repr(r.x),
            repr(r.y),
            "" if r.depth is None else repr(r.depth),
        ])
    return out


def write_csv(record: SampleRecord, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(to_long_format(record))


def read_csv(path: str) -> SampleRecord:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected sample header: {header}")
        for rec in reader:
            rows.append(NodeRow(
                order_index=int(rec[0]),
                node_id=int(rec[1]),
                source_id=None if rec[2] == "" else int(rec[2]),
                pop_degree=int(rec[3]),
                links_reported=int(rec[4]),
                links_responding=int(rec[5]),
                links_recruited=int(rec[6]),
                links_redundant=int(rec[7]),
                infected=bool(int(rec[8])),
                x=float(rec[9]),
                y=float(rec[10]),
                depth=None if rec[11] == "" else float(rec[11]),
            ))
    return SampleRecord(rows=rows)
