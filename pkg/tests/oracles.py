"""Independent oracles the tests check the library against.

These deliberately re-derive results through different algorithms than the
implementation: Floyd-Warshall + recursive splitting instead of Dijkstra +
linear solve for ECMP; bisection over max-flow feasibility instead of the
simplex for single-flow min-max routing; exhaustive vertex enumeration for
small LPs.
"""

from collections import deque
from itertools import combinations

import numpy as np


def floyd_warshall_dist(topo):
    n = topo.node_count
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for lk in topo.links:
        dist[lk.src, lk.dst] = min(dist[lk.src, lk.dst], lk.cost)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k: k + 1] + dist[k: k + 1, :])
    return dist


def ecmp_fractions_oracle(topo, tie_tol=1e-12):
    """Per-hop equal splitting simulated by direct recursion."""
    n, m = topo.node_count, topo.link_count
    dist = floyd_warshall_dist(topo)
    frac = np.zeros((n, n, m))
    for s in range(n):
        for d in range(n):
            if s == d:
                continue

            def walk(node, mass):
                if node == d:
                    return
                hops = [e for e in topo.out_links[node]
                        if abs(dist[node, d] -
                               (topo.links[e].cost + dist[topo.links[e].dst, d])) <= tie_tol]
                share = mass / len(hops)
                for e in hops:
                    frac[s, d, e] += share
                    walk(topo.links[e].dst, share)

            walk(s, 1.0)
    return frac


def max_flow(n, arcs, s, t):
    """Edmonds-Karp. arcs: list of (u, v, capacity)."""
    cap = {}
    adj = [[] for _ in range(n)]
    for u, v, c in arcs:
        if c <= 0:
            continue
        if (u, v) not in cap:
            adj[u].append(v)
            adj[v].append(u)
            cap[(u, v)] = 0.0
            cap.setdefault((v, u), 0.0)
        cap[(u, v)] += c
    flow = 0.0
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in adj[u]:
                if v not in parent and cap.get((u, v), 0.0) > 1e-12:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            return flow
        bottleneck = np.inf
        v = t
        while parent[v] is not None:
            u = parent[v]
            bottleneck = min(bottleneck, cap[(u, v)])
            v = u
        v = t
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= bottleneck
            cap[(v, u)] += bottleneck
            v = u
        flow += bottleneck


def minmax_single_flow_oracle(topo, background, s, d, demand, iters=70):
    """Smallest U such that `demand` routes s->d within c*U - background.

    Feasibility at a given U is a max-flow question, which implicitly
    searches every path; bisection pins U far below the 1e-6 comparison
    tolerance.
    """
    background = np.asarray(background, dtype=float)
    if demand <= 0:
        return float(np.max(background / topo.capacity))
    lo = float(np.max(background / topo.capacity))
    hi = max(lo, 1.0)
    while not _routable(topo, background, s, d, demand, hi):
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("oracle failed to bracket U")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _routable(topo, background, s, d, demand, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _routable(topo, background, s, d, demand, u):
    arcs = [(lk.src, lk.dst, topo.capacity[e] * u - background[e])
            for e, lk in enumerate(topo.links)]
    return max_flow(topo.node_count, arcs, s, d) >= demand - 1e-11


def simple_paths(topo, s, d, limit=10_000):
    """All simple paths s->d as link-index tuples (DFS)."""
    paths = []

    def dfs(node, visited, acc):
        if node == d:
            paths.append(tuple(acc))
            if len(paths) > limit:
                raise RuntimeError("too many simple paths")
            return
        for e in topo.out_links[node]:
            nxt = topo.links[e].dst
            if nxt not in visited:
                dfs(nxt, visited | {nxt}, acc + [e])

    dfs(s, {s}, [])
    return paths


def lp_vertex_enumeration_oracle(problem, tol=1e-9):
    """Minimum objective over all vertices of the (bounded) feasible region.

    Enumerates every n-subset of {rows as equalities} U {bound hyperplanes},
    solves, and keeps feasible points. Only for small problems.
    """
    n = problem.n_vars
    hyperplanes = []
    for i in range(problem.n_rows):
        hyperplanes.append((problem.a[i], problem.b[i]))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        hyperplanes.append((e, problem.lower[j]))
        if np.isfinite(problem.upper[j]):
            hyperplanes.append((e, problem.upper[j]))
    best = np.inf
    found = False
    for combo in combinations(range(len(hyperplanes)), n):
        a_sq = np.array([hyperplanes[i][0] for i in combo])
        b_sq = np.array([hyperplanes[i][1] for i in combo])
        try:
            x = np.linalg.solve(a_sq, b_sq)
        except np.linalg.LinAlgError:
            continue
        if np.any(x < problem.lower - tol) or np.any(x > problem.upper + tol):
            continue
        ax = problem.a @ x
        ok = True
        for i, rel in enumerate(problem.rel):
            r = ax[i] - problem.b[i]
            if (rel == "<=" and r > tol) or (rel == ">=" and r < -tol) or \
                    (rel == "=" and abs(r) > tol):
                ok = False
                break
        if ok:
            found = True
            best = min(best, float(problem.c @ x))
    if not found:
        raise RuntimeError("oracle found no feasible vertex")
    return best
