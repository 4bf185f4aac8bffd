"""Rerouting selected flows with the min-max-utilization LP.

A single hot flow on the triangle gets split across its two paths,
halving the worst link load; freeing every flow reaches the same point
here. Also dumps the LP in interchange format for external solvers.
"""

import numpy as np

import critflow as cf
from critflow.rerouting import build_rerouting_lp

triangle = cf.triangle3()
tm = cf.TrafficMatrix(3, np.zeros((3, 3)))
tm.demand[0, 2] = 0.9

print("=== ECMP sends everything down the direct link ===")
fractions = cf.compute_ecmp_fractions(triangle)
print(f"ECMP max utilization: "
      f"{cf.ecmp_link_loads(triangle, tm, fractions).max_utilization:.2f}")

print("\n=== Rerouting the one critical flow ===")
background = cf.ecmp_link_loads(triangle, tm, fractions, exclude=[(0, 2)])
sol = cf.solve_rerouting(triangle, tm, [(0, 2)], background)
print(f"max utilization after rerouting: {sol.u:.2f}")
for e, ratio in enumerate(sol.sigma[(0, 2)]):
    if ratio > 1e-9:
        lk = triangle.links[e]
        print(f"  {ratio:.0%} of the demand on link {lk.src}->{lk.dst}")

print("\n=== All-flows optimum (the pr_u denominator oracle) ===")
u_opt, _ = cf.solve_optimal_all_flows(triangle, tm)
print(f"u_optimal = {u_opt:.2f}")

print("\n=== LP interchange dump ===")
problem = build_rerouting_lp(triangle, tm, [(0, 2)], background.load, 1e-5)
print(cf.lp_to_text(problem, name="triangle rerouting")[:400] + "...")
