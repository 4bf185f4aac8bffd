"""ECMP shortest-path routing: per-flow split fractions and link loads.

Splitting follows deployed-router (OSPF) semantics: at every node, traffic
toward a destination divides equally across all next hops that lie on a
minimum-cost path, independently at each hop. The per-flow fraction on a
link is the absorption fraction that results from this per-hop process.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

# Two summed costs are "equal" within this tolerance; exact for integral costs.
COST_TIE_TOL = 1e-12


class RoutingError(Exception):
    pass


@dataclass
class EcmpFractions:
    """frac[s, d, e] = share of demand (s, d) carried on link e under ECMP."""

    frac: np.ndarray  # (N, N, M)

    def for_flow(self, s, d):
        return self.frac[s, d]


@dataclass
class LinkLoads:
    load: np.ndarray  # (M,)
    max_utilization: float

    @classmethod
    def from_load(cls, load, capacity):
        load = np.asarray(load, dtype=float)
        return cls(load=load, max_utilization=float(np.max(load / capacity)))


def shortest_distances_to(topo, dest, weights=None):
    """Dijkstra distances from every node to `dest` along directed links."""
    w = topo.cost if weights is None else weights
    n = topo.node_count
    dist = np.full(n, np.inf)
    dist[dest] = 0.0
    heap = [(0.0, dest)]
    done = [False] * n
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        # relax links (v -> u): moving from v toward dest via u
        for e in topo.in_links[u]:
            v = topo.links[e].src
            nd = du + w[e]
            if nd < dist[v] - COST_TIE_TOL:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def compute_ecmp_fractions(topo):
    """Per-flow per-link ECMP split fractions for all N*(N-1) flows.

    For each destination, the equal-split next-hop relation defines an
    acyclic transition matrix P (rows strictly decrease distance); the
    expected-visit matrix (I - P)^-1 turns it into absorption fractions
    for every source at once.
    """
    n, m = topo.node_count, topo.link_count
    frac = np.zeros((n, n, m))
    for d in range(n):
        dist = shortest_distances_to(topo, d)
        if not np.all(np.isfinite(dist)):
            bad = int(np.argmax(~np.isfinite(dist)))
            raise RoutingError(f"no path from node {bad} to node {d}")
        next_links = [[] for _ in range(n)]
        for e, lk in enumerate(topo.links):
            if abs(dist[lk.src] - (lk.cost + dist[lk.dst])) <= COST_TIE_TOL:
                next_links[lk.src].append(e)
        p = np.zeros((n, n))
        for i in range(n):
            if i == d:
                continue
            share = 1.0 / len(next_links[i])
            for e in next_links[i]:
                p[i, topo.links[e].dst] += share
        visits = np.linalg.inv(np.eye(n) - p)  # visits[s, i]
        for i in range(n):
            if i == d or not next_links[i]:
                continue
            share = 1.0 / len(next_links[i])
            for e in next_links[i]:
                frac[:, d, e] += visits[:, i] * share
        frac[d, d, :] = 0.0
    return EcmpFractions(frac=frac)


def ecmp_link_loads(topo, tm, fractions, exclude=()):
    """Aggregate per-link loads when flows in `exclude` are lifted off ECMP.

    exclude is an iterable of (s, d) pairs; with exclude empty this is the
    full ECMP load vector.
    """
    demand = np.array(tm.demand, dtype=float, copy=True)
    for s, d in exclude:
        demand[s, d] = 0.0
    load = np.tensordot(demand, fractions.frac, axes=([0, 1], [0, 1]))
    return LinkLoads.from_load(load, topo.capacity)


def ecmp_max_utilization(topo, tm, fractions=None):
    if fractions is None:
        fractions = compute_ecmp_fractions(topo)
    return ecmp_link_loads(topo, tm, fractions).max_utilization
