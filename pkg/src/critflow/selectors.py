"""Critical-flow selectors: demand heuristics, random control, brute force.

All selectors return exactly k distinct flows with deterministic
tie-breaking (ascending flow id), so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .ecmp import compute_ecmp_fractions, ecmp_link_loads
from .rerouting import solve_rerouting
from .topology import flow_index, flow_of_index

TRAVERSAL_EPS = 1e-12
DEFAULT_COMBINATION_CAP = 10_000


class SelectionError(Exception):
    pass


@dataclass
class SelectionResult:
    flows: tuple           # (s, d) pairs
    method: str            # policy | top_k | top_k_critical | random | brute_force

    def __post_init__(self):
        flows = tuple((int(s), int(d)) for s, d in self.flows)
        if len(set(flows)) != len(flows):
            raise SelectionError("selected flows must be distinct")
        if any(s == d for s, d in flows):
            raise SelectionError("flows require s != d")
        self.flows = flows

    def action_ids(self, n):
        return tuple(flow_index(s, d, n) for s, d in self.flows)


def _ranked_by_demand(tm):
    """All flows ordered by descending demand, flow-id ascending on ties."""
    n = tm.n
    flows = [(s, d) for s in range(n) for d in range(n) if s != d]
    return sorted(flows, key=lambda f: (-tm.demand[f[0], f[1]],
                                        flow_index(f[0], f[1], n)))


def top_k(tm, k):
    """The k largest flows by demand volume."""
    ranked = _ranked_by_demand(tm)
    if k > len(ranked):
        raise SelectionError(f"k={k} exceeds flow count {len(ranked)}")
    return SelectionResult(flows=tuple(ranked[:k]), method="top_k")


def top_k_critical(topo, tm, k, fractions=None):
    """The k largest flows drawn from the most congested links.

    Links are walked in descending ECMP utilization; each link contributes
    its traversing flows (ECMP fraction > 0) in descending demand order.
    If the walk runs out of links first, remaining slots fill from the
    global demand ranking.
    """
    n = tm.n
    if k > n * (n - 1):
        raise SelectionError(f"k={k} exceeds flow count {n * (n - 1)}")
    if fractions is None:
        fractions = compute_ecmp_fractions(topo)
    loads = ecmp_link_loads(topo, tm, fractions)
    util = loads.load / topo.capacity
    link_order = sorted(range(topo.link_count), key=lambda e: (-util[e], e))
    chosen = []
    seen = set()
    for e in link_order:
        if len(chosen) >= k:
            break
        on_link = [(s, d) for s in range(n) for d in range(n)
                   if s != d and fractions.frac[s, d, e] > TRAVERSAL_EPS]
        on_link.sort(key=lambda f: (-tm.demand[f[0], f[1]],
                                    flow_index(f[0], f[1], n)))
        for f in on_link:
            if f not in seen:
                seen.add(f)
                chosen.append(f)
                if len(chosen) >= k:
                    break
    if len(chosen) < k:  # sparse TM: spill to the global ranking
        for f in _ranked_by_demand(tm):
            if f not in seen:
                seen.add(f)
                chosen.append(f)
                if len(chosen) >= k:
                    break
    return SelectionResult(flows=tuple(chosen), method="top_k_critical")


def random_k(n_flows, k, seed, n=None):
    """Uniform without-replacement sample of k flow ids."""
    if k > n_flows:
        raise SelectionError(f"k={k} exceeds flow count {n_flows}")
    rng = np.random.default_rng(seed)
    ids = rng.choice(n_flows, size=k, replace=False)
    if n is None:
        # recover n from n_flows = n*(n-1)
        n = int((1 + np.sqrt(1 + 4 * n_flows)) / 2)
        if n * (n - 1) != n_flows:
            raise SelectionError(f"{n_flows} is not of the form n*(n-1)")
    flows = tuple(flow_of_index(int(a), n) for a in sorted(ids))
    return SelectionResult(flows=flows, method="random")


def brute_force_best(topo, tm, k, fractions=None,
                     combination_cap=DEFAULT_COMBINATION_CAP):
    """Exhaustively best k-subset by rerouting-LP utilization.

    Ties resolve to the lexicographically smallest flow-id subset. Returns
    (SelectionResult, u_best).
    """
    n = tm.n
    n_flows = n * (n - 1)
    if k > n_flows:
        raise SelectionError(f"k={k} exceeds flow count {n_flows}")
    total = comb(n_flows, k)
    if total > combination_cap:
        raise SelectionError(
            f"C({n_flows},{k}) = {total} exceeds cap {combination_cap}")
    if fractions is None:
        fractions = compute_ecmp_fractions(topo)
    best_u, best_sel = np.inf, None
    for subset in combinations(range(n_flows), k):
        flows = [flow_of_index(a, n) for a in subset]
        background = ecmp_link_loads(topo, tm, fractions, exclude=flows)
        sol = solve_rerouting(topo, tm, flows, background)
        if sol.u < best_u - 1e-12:
            best_u, best_sel = sol.u, flows
    return SelectionResult(flows=tuple(best_sel), method="brute_force"), float(best_u)
