"""Explicit rerouting of selected flows to minimize maximum link utilization.

The selected flows get per-link split ratios from an LP; everything else
contributes a fixed background load (normally its ECMP share). The LP is

    minimize    U + eps * sum of all ratios
    subject to  sum_f ratio[f,e] * demand_f + background_e <= capacity_e * U
                ratio conservation: net inflow of ratio at a node is
                    -1 at the flow source, +1 at its destination, 0 elsewhere
                0 <= ratio <= 1,  U >= 0

The eps term keeps optimal routes from wandering onto needlessly long
paths while staying far too small to perturb U.

Also here: the all-flows optimum (zero background), the network delay
proxy sum(load / (capacity - load)), and its minimizer over all routings
via Frank-Wolfe (certified by the duality gap).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ecmp import LinkLoads, shortest_distances_to
from .simplex import LpProblem, solve_lp

CONSERVATION_TOL = 1e-7


class OverloadedInstanceError(Exception):
    pass


@dataclass
class ReroutingSolution:
    sigma: dict            # (s, d) -> (M,) split-ratio vector
    u: float               # max link utilization achieved
    objective: float       # LP objective (U + eps * sum sigma)
    link_loads: LinkLoads


def default_epsilon(topo, k):
    """Small enough that the path-length tie-break never moves U."""
    return 1e-4 / (topo.link_count * max(k, 1))


def build_rerouting_lp(topo, tm, critical, background_load, epsilon):
    """Assemble the LP; variable 0 is U, then one ratio per (flow, link)."""
    flows = sorted(critical)
    n, m = topo.node_count, topo.link_count
    k = len(flows)
    nv = 1 + k * m

    c = np.full(nv, epsilon)
    c[0] = 1.0
    lower = np.zeros(nv)
    upper = np.ones(nv)
    upper[0] = np.inf

    rows = []
    rel = []
    rhs = []
    names = ["U"]
    for fi, (s, d) in enumerate(flows):
        for e in range(m):
            lk = topo.links[e]
            names.append(f"r{s}_{d}__{lk.src}_{lk.dst}")

    def var(fi, e):
        return 1 + fi * m + e

    for e in range(m):
        row = np.zeros(nv)
        for fi, (s, d) in enumerate(flows):
            row[var(fi, e)] = tm.demand[s, d]
        row[0] = -topo.capacity[e]
        rows.append(row)
        rel.append("<=")
        rhs.append(-background_load[e])

    for fi, (s, d) in enumerate(flows):
        for i in range(n):
            row = np.zeros(nv)
            for e in topo.in_links[i]:
                row[var(fi, e)] += 1.0
            for e in topo.out_links[i]:
                row[var(fi, e)] -= 1.0
            rows.append(row)
            rel.append("=")
            rhs.append(-1.0 if i == s else (1.0 if i == d else 0.0))

    return LpProblem(c=c, a=np.array(rows), rel=rel, b=np.array(rhs),
                     lower=lower, upper=upper, var_names=names)


def solve_rerouting(topo, tm, critical, background, epsilon=None):
    """Optimal split ratios for the flows in `critical` given fixed
    background loads (from ECMP with those flows excluded)."""
    bg = np.asarray(background.load if isinstance(background, LinkLoads)
                    else background, dtype=float)
    flows = sorted(critical)
    if not flows:
        loads = LinkLoads.from_load(bg, topo.capacity)
        return ReroutingSolution(sigma={}, u=loads.max_utilization,
                                 objective=loads.max_utilization,
                                 link_loads=loads)
    if epsilon is None:
        epsilon = default_epsilon(topo, len(flows))
    problem = build_rerouting_lp(topo, tm, flows, bg, epsilon)
    sol = solve_lp(problem)
    m = topo.link_count
    sigma = {}
    load = bg.copy()
    for fi, (s, d) in enumerate(flows):
        ratios = sol.x[1 + fi * m: 1 + (fi + 1) * m]
        sigma[(s, d)] = ratios
        load = load + ratios * tm.demand[s, d]
    loads = LinkLoads.from_load(load, topo.capacity)
    return ReroutingSolution(sigma=sigma, u=loads.max_utilization,
                             objective=sol.objective, link_loads=loads)


def solve_optimal_all_flows(topo, tm, epsilon=None):
    """Explicit-routing optimum over all flows with zero background.

    Returns (u_opt, ReroutingSolution).
    """
    flows = topo.flows()
    sol = solve_rerouting(topo, tm, flows,
                          np.zeros(topo.link_count), epsilon=epsilon)
    return sol.u, sol


def check_rerouting_feasibility(topo, tm, solution, background, tol=CONSERVATION_TOL):
    """Independent constraint check of a ReroutingSolution (not the solver's
    own residuals). Raises AssertionError naming the violated family."""
    bg = np.asarray(background.load if isinstance(background, LinkLoads)
                    else background, dtype=float)
    load = bg.copy()
    for (s, d), ratios in solution.sigma.items():
        assert np.all(ratios >= -tol) and np.all(ratios <= 1 + tol), \
            f"ratio bounds violated for flow ({s},{d})"
        net = np.zeros(topo.node_count)
        for e, lk in enumerate(topo.links):
            net[lk.dst] += ratios[e]
            net[lk.src] -= ratios[e]
        want = np.zeros(topo.node_count)
        want[s], want[d] = -1.0, 1.0
        assert np.max(np.abs(net - want)) <= tol, \
            f"conservation violated for flow ({s},{d})"
        load = load + ratios * tm.demand[s, d]
    assert np.max(np.abs(load - solution.link_loads.load)) <= tol, \
        "link-load accounting mismatch"
    assert np.all(load <= topo.capacity * solution.u + tol), \
        "capacity-utilization constraint violated"


def evaluate_delay(topo, loads):
    """Network delay proxy: sum over links of l/(c-l); +inf if any l >= c."""
    load = np.asarray(loads.load if isinstance(loads, LinkLoads) else loads,
                      dtype=float)
    cap = topo.capacity
    if np.any(load >= cap):
        return float("inf")
    return float(np.sum(load / (cap - load)))


def _all_or_nothing(topo, demand, weights):
    """Route every demand on a single min-weight path; aggregate link loads."""
    n, m = topo.node_count, topo.link_count
    loads = np.zeros(m)
    for d in range(n):
        col = demand[:, d]
        if not np.any(col > 0):
            continue
        dist = shortest_distances_to(topo, d, weights=weights)
        next_link = np.full(n, -1, dtype=int)
        for i in range(n):
            if i == d:
                continue
            best_e, best_v = -1, np.inf
            for e in topo.out_links[i]:
                v = weights[e] + dist[topo.links[e].dst]
                if v < best_v - 1e-15:
                    best_v, best_e = v, e
            next_link[i] = best_e
        acc = col.copy()
        for i in np.argsort(-dist, kind="stable"):
            if i == d or acc[i] <= 0:
                continue
            e = next_link[i]
            loads[e] += acc[i]
            acc[topo.links[e].dst] += acc[i]
    return loads


def solve_delay_optimal(topo, tm, max_iters=500, tol=1e-5):
    """Minimize the delay proxy over all feasible routings via Frank-Wolfe.

    Initializes from the min-max-utilization optimum (which must leave every
    link strictly under capacity, else the instance is overloaded). Each
    step routes everything on shortest paths under the marginal-delay
    weights c/(c-l)^2 and line-searches toward that corner; the duality gap
    certifies the returned value to relative `tol`.

    Returns (omega, LinkLoads).
    """
    cap = topo.capacity
    if tm.total_demand() == 0:
        zeros = LinkLoads.from_load(np.zeros(topo.link_count), cap)
        return 0.0, zeros
    u_opt, init = solve_optimal_all_flows(topo, tm)
    if u_opt >= 1.0 - 1e-12:
        raise OverloadedInstanceError(
            f"overloaded instance: best max utilization {u_opt:.6f} >= 1")
    load = init.link_loads.load.copy()
    omega = float(np.sum(load / (cap - load)))
    for _ in range(max_iters):
        w = cap / (cap - load) ** 2
        target = _all_or_nothing(topo, tm.demand, w)
        step_dir = target - load
        gap = float(-w @ step_dir)  # Omega(load) - Omega* <= gap
        if gap <= tol * max(omega, 1e-12):
            break
        # largest step keeping strictly below capacity
        rising = step_dir > 0
        if np.any(rising):
            t_ub = min(1.0, float(np.min(
                (cap[rising] - load[rising]) / step_dir[rising])) * (1 - 1e-9))
        else:
            t_ub = 1.0

        def dphi(t):
            lt = load + t * step_dir
            return float(np.sum(step_dir * cap / (cap - lt) ** 2))

        if dphi(t_ub) <= 0:
            t = t_ub
        else:
            lo_t, hi_t = 0.0, t_ub
            for _ in range(80):
                mid = 0.5 * (lo_t + hi_t)
                if dphi(mid) <= 0:
                    lo_t = mid
                else:
                    hi_t = mid
            t = lo_t
        if t <= 0:
            break
        load = load + t * step_dir
        new_omega = float(np.sum(load / (cap - load)))
        improved = omega - new_omega
        omega = new_omega
        if improved < tol * max(omega, 1e-12):
            break
    return omega, LinkLoads.from_load(load, cap)
