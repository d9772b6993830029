"""
Grooming a three-node star by hand
==================================

Six demands of 10 units on a star with granularity 16. The order in which the
decoder sees the demands decides how many wavelengths are opened.
"""

import numpy as np

from treegroom import TrafficInstance, decode, demand_index, star, validate
from treegroom.verify import exhaustive_oracle

topo = star(3)
pats = np.full((1, 3, 3), 10)
np.fill_diagonal(pats[0], 0)
inst = TrafficInstance(3, 1, 16, pats)
idx = demand_index(3)

###############################################################################
# A poor order: the hub cannot terminate (1,0) and (2,0) on one wavelength,
# so a third wavelength is needed.

order = [idx.index(*p) for p in [(1, 2), (2, 1), (1, 0), (0, 1), (2, 0), (0, 2)]]
sol = decode(order, inst, topo)
for w in sol.wavelengths:
    print(f"wavelength {w.id}: drops at {sorted(w.drop_nodes)}")
print("ADMs, wavelengths:", sol.fitness)

###############################################################################
# A better order packs everything onto two wavelengths.

order = [idx.index(*p) for p in [(1, 2), (2, 0), (0, 1), (2, 1), (1, 0), (0, 2)]]
sol = decode(order, inst, topo)
print("ADMs, wavelengths:", sol.fitness)
print(validate(sol, inst, topo))

###############################################################################
# All 720 orders, for comparison.

res = exhaustive_oracle(inst, topo)
print("best over every order:", res.fitness, "witness", [idx.pair(k) for k in res.witness])
