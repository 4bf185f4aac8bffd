"""Directed network topologies with per-link capacity and cost.

A topology is a strongly connected directed graph on nodes 0..N-1. Links
carry a positive capacity (traffic units) and a positive routing cost.
Flows are ordered (source, destination) pairs; `flow_index` maps them onto
the contiguous id range 0..N*(N-1)-1 used by selectors and the policy net.

Text format (UTF-8, line oriented, `#` starts a comment):

    nodes <N>
    link <src> <dst> <capacity> <cost>

The capacity field may be `-` to request capacity inference as
`scale / cost` (Cisco-style inverse-cost capacities for cost-only feeds).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

DEFAULT_CAPACITY_SCALE = 1000.0


class TopologyError(Exception):
    """Base error for topology parsing/validation."""


class TopologyParseError(TopologyError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class TopologyValidationError(TopologyError):
    pass


class Link(NamedTuple):
    src: int
    dst: int
    capacity: float
    cost: float


@dataclass
class Topology:
    """Immutable-by-convention directed graph. Do not mutate after init."""

    node_count: int
    links: tuple[Link, ...]
    name: str = ""

    # derived, filled in __post_init__
    capacity: np.ndarray = field(init=False, repr=False)
    cost: np.ndarray = field(init=False, repr=False)
    link_index: dict[tuple[int, int], int] = field(init=False, repr=False)
    out_links: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    in_links: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        self.links = tuple(Link(*lk) for lk in self.links)
        _validate(self.node_count, self.links)
        self.capacity = np.array([lk.capacity for lk in self.links], dtype=float)
        self.cost = np.array([lk.cost for lk in self.links], dtype=float)
        self.link_index = {(lk.src, lk.dst): i for i, lk in enumerate(self.links)}
        out = [[] for _ in range(self.node_count)]
        inc = [[] for _ in range(self.node_count)]
        for i, lk in enumerate(self.links):
            out[lk.src].append(i)
            inc[lk.dst].append(i)
        self.out_links = tuple(tuple(v) for v in out)
        self.in_links = tuple(tuple(v) for v in inc)

    @property
    def link_count(self):
        return len(self.links)

    @property
    def flow_count(self):
        return self.node_count * (self.node_count - 1)

    def flows(self):
        """All (s, d) pairs in flow-index order."""
        n = self.node_count
        return [(s, d) for s in range(n) for d in range(n) if s != d]


def _validate(n, links):
    if n < 2:
        raise TopologyValidationError(f"need at least 2 nodes, got {n}")
    seen = set()
    for lk in links:
        if not (0 <= lk.src < n and 0 <= lk.dst < n):
            raise TopologyValidationError(
                f"link ({lk.src},{lk.dst}) has node id outside [0,{n})")
        if lk.src == lk.dst:
            raise TopologyValidationError(f"self-loop link at node {lk.src}")
        if (lk.src, lk.dst) in seen:
            raise TopologyValidationError(
                f"duplicate link ({lk.src},{lk.dst})")
        seen.add((lk.src, lk.dst))
        if not (lk.capacity > 0 and np.isfinite(lk.capacity)):
            raise TopologyValidationError(
                f"link ({lk.src},{lk.dst}) capacity must be positive, got {lk.capacity}")
        if not (lk.cost > 0 and np.isfinite(lk.cost)):
            raise TopologyValidationError(
                f"link ({lk.src},{lk.dst}) cost must be positive, got {lk.cost}")
    if not _strongly_connected(n, links):
        raise TopologyValidationError("not strongly connected")


def _strongly_connected(n, links):
    fwd = [[] for _ in range(n)]
    rev = [[] for _ in range(n)]
    for lk in links:
        fwd[lk.src].append(lk.dst)
        rev[lk.dst].append(lk.src)
    return _reaches_all(fwd, n) and _reaches_all(rev, n)


def _reaches_all(adj, n):
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return all(seen)


def flow_index(s, d, n):
    """Map ordered pair (s, d), s != d, to an id in [0, n*(n-1))."""
    if not (0 <= s < n and 0 <= d < n):
        raise ValueError(f"node out of range: ({s},{d}) for n={n}")
    if s == d:
        raise ValueError(f"flow requires s != d, got ({s},{d})")
    return s * (n - 1) + (d if d < s else d - 1)


def flow_of_index(a, n):
    """Inverse of `flow_index`."""
    if not (0 <= a < n * (n - 1)):
        raise ValueError(f"flow id {a} out of range for n={n}")
    s, r = divmod(a, n - 1)
    return s, (r if r < s else r + 1)


def load_topology(path, infer_scale=DEFAULT_CAPACITY_SCALE):
    """Parse the topology text format. `-` capacities become scale/cost."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_topology(fh.read(), name=str(path), infer_scale=infer_scale)


def parse_topology(text, name="", infer_scale=DEFAULT_CAPACITY_SCALE):
    n = None
    links = []
    for line_no, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "nodes":
            if n is not None:
                raise TopologyParseError("duplicate 'nodes' header", line_no)
            if len(parts) != 2:
                raise TopologyParseError("expected 'nodes <N>'", line_no)
            try:
                n = int(parts[1])
            except ValueError:
                raise TopologyParseError(f"bad node count {parts[1]!r}", line_no) from None
        elif parts[0] == "link":
            if n is None:
                raise TopologyParseError("'link' before 'nodes' header", line_no)
            if len(parts) != 5:
                raise TopologyParseError(
                    "expected 'link <src> <dst> <capacity> <cost>'", line_no)
            try:
                src, dst = int(parts[1]), int(parts[2])
                cost = float(parts[4])
                if parts[3] == "-":
                    if cost <= 0:
                        raise TopologyParseError(
                            "cannot infer capacity from non-positive cost", line_no)
                    cap = infer_scale / cost
                else:
                    cap = float(parts[3])
            except ValueError:
                raise TopologyParseError(f"bad link fields {parts[1:]!r}", line_no) from None
            links.append(Link(src, dst, cap, cost))
        else:
            raise TopologyParseError(f"unknown directive {parts[0]!r}", line_no)
    if n is None:
        raise TopologyParseError("missing 'nodes' header")
    return Topology(node_count=n, links=tuple(links), name=name)


def serialize_topology(topo):
    out = [f"nodes {topo.node_count}"]
    for lk in topo.links:
        out.append(f"link {lk.src} {lk.dst} {lk.capacity!r} {lk.cost!r}")
    return "\n".join(out) + "\n"


def save_topology(topo, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_topology(topo))


def infer_capacities_from_costs(topo, scale):
    """Return a copy with capacity = scale / cost on every link."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    links = tuple(Link(lk.src, lk.dst, scale / lk.cost, lk.cost) for lk in topo.links)
    return Topology(node_count=topo.node_count, links=links, name=topo.name)


def from_undirected_edges(n, edges, name=""):
    """Build a topology from undirected (u, v, capacity, cost) edges.

    Each edge expands to the two directed links with equal capacity and cost.
    """
    links = []
    for u, v, cap, cost in edges:
        links.append(Link(u, v, cap, cost))
        links.append(Link(v, u, cap, cost))
    return Topology(node_count=n, links=tuple(links), name=name)


def triangle3(capacity=1.0, cost=1.0):
    """3-node full mesh; every pair has a direct link and a 2-hop detour."""
    edges = [(0, 1, capacity, cost), (1, 2, capacity, cost), (0, 2, capacity, cost)]
    return from_undirected_edges(3, edges, name="triangle3")


def diamond4(capacity=1.0, cost=1.0):
    """4-node diamond: 0-1, 0-2, 1-3, 2-3. Two equal-cost paths 0 -> 3."""
    edges = [(0, 1, capacity, cost), (0, 2, capacity, cost),
             (1, 3, capacity, cost), (2, 3, capacity, cost)]
    return from_undirected_edges(4, edges, name="diamond4")


def ring_with_chords(capacity=1.0, cost=1.0):
    """5-node ring plus two chords; the workbench's desk-scale test net."""
    edges = [(0, 1, capacity, cost), (1, 2, capacity, cost), (2, 3, capacity, cost),
             (3, 4, capacity, cost), (4, 0, capacity, cost),
             (0, 2, capacity, cost), (1, 3, capacity, cost)]
    return from_undirected_edges(5, edges, name="ring5")


def random_topology(n, extra_edges, seed, capacity=1.0, cost_range=(1.0, 3.0)):
    """Random strongly connected topology: an undirected ring plus chords.

    Costs are drawn uniformly from `cost_range` per undirected edge;
    capacities are uniform. Deterministic given seed.
    """
    rng = np.random.default_rng(seed)
    edges = set()
    for u in range(n):
        edges.add((min(u, (u + 1) % n), max(u, (u + 1) % n)))
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n)
                  if (u, v) not in edges]
    rng.shuffle(candidates)
    for u, v in candidates[:extra_edges]:
        edges.add((u, v))
    lo, hi = cost_range
    out = []
    for u, v in sorted(edges):
        c = float(rng.uniform(lo, hi))
        out.append((u, v, capacity, c))
    return from_undirected_edges(n, out, name=f"random{n}-{seed}")
