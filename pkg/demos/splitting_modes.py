"""
Dividing and cutting demands
============================

A divided demand sends part of its rate through spare capacity on the current
wavelength. A cut demand is relayed at an intermediate node that already
terminates two wavelengths.
"""

import numpy as np

from treegroom import GroomingState, complete_binary, star
from treegroom.traffic import TrafficInstance


def instance(n, entries, g=16):
    pats = np.zeros((1, n, n), np.int64)
    for (i, j), r in entries.items():
        pats[0, i, j] = r
    return TrafficInstance(n, 1, g, pats)


###############################################################################
# Dividing on a star: link 1->0 already carries 10 units, so only 6 of the
# 10 units of (1,3) fit. The rest stays open for a later wavelength.

state = GroomingState(instance(4, {(1, 2): 10, (2, 1): 10, (3, 1): 4, (1, 3): 10}), star(4))
w = state.add_wavelength()
for pair in [(1, 2), (2, 1), (3, 1)]:
    state.place_whole(w, pair)
print("whole fit?", state.fits_whole(w, (1, 3)))
print(state.try_divide(w, (1, 3)))
print("still to place:", state.remaining((1, 3)))

###############################################################################
# Cutting on a binary tree: 3->5 is relayed at node 1, the first half rides
# wavelength 2 and the second half wavelength 1. No ADM is added.

topo = complete_binary(7)
state = GroomingState(instance(7, {(1, 5): 5, (3, 1): 5, (3, 5): 5, (1, 3): 2}), topo)
w1 = state.add_wavelength()
state.place_whole(w1, (1, 5))
w2 = state.add_wavelength()
state.place_whole(w2, (3, 1))
before = state.tally()
for seg in state.try_cut(w2, (3, 5)).fragments:
    print(f"{seg.side:<11} segment {seg.endpoints} on wavelength {seg.wavelength}")
print("tally before/after:", before, state.tally())

###############################################################################
# Single-link demands have no intermediate node and are never cut.

print("cut (1,3):", state.try_cut(w2, (1, 3)).reason)
