"""Topologies and ECMP routing.

Loads the bundled Abilene network, builds a toy diamond, and shows how
equal-cost multipath splits a flow and loads the links.
"""

from pathlib import Path

import numpy as np

import critflow as cf

DATA = Path(cf.__file__).parent / "data"

print("=== Abilene ===")
abilene = cf.load_topology(DATA / "abilene.topo")
print(f"{abilene.node_count} nodes, {abilene.link_count} directed links, "
      f"{abilene.flow_count} flows")

print("\n=== Diamond: two equal-cost routes 0 -> 3 ===")
diamond = cf.diamond4()
fractions = cf.compute_ecmp_fractions(diamond)
for (i, j), e in sorted(diamond.link_index.items()):
    share = fractions.for_flow(0, 3)[e]
    if share > 0:
        print(f"  link {i}->{j}: {share:.0%} of the (0,3) demand")

tm = cf.TrafficMatrix(4, np.zeros((4, 4)))
tm.demand[0, 3] = 0.8
loads = cf.ecmp_link_loads(diamond, tm, fractions)
print(f"demand 0.8 on (0,3): max link utilization {loads.max_utilization:.2f}")

print("\n=== Cost asymmetry kills a path ===")
links = []
for u, v in [(0, 1), (0, 2), (1, 3), (2, 3)]:
    cost = 2.0 if (u, v) == (0, 1) else 1.0
    links.append(cf.Link(u, v, 1.0, cost))
    links.append(cf.Link(v, u, 1.0, cost))
skewed = cf.Topology(4, tuple(links))
f = cf.compute_ecmp_fractions(skewed).for_flow(0, 3)
used = {f"{skewed.links[e].src}->{skewed.links[e].dst}": round(float(x), 2)
        for e, x in enumerate(f) if x > 0}
print(f"with cost(0->1)=2 the flow uses only {used}")
