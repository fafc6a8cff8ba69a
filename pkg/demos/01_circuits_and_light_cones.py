"""Lattice circuits, validation, light cones, and cuts.

Builds a few geometrically-local circuits, checks their invariants, and shows
how information spreads through shallow layers and how a slice partitions the
lattice into back / middle / front regions.
"""

from dncsim import geomcircuit as gc
from dncsim.harness import generate_circuit

# a depth-2 brickwork chain of Haar-random two-qubit gates
circ = generate_circuit({"kind": "brickwork", "dims": [12], "depth": 2, "seed": 7, "gates": "haar"})
report = gc.validate(circ)
print(f"12-qubit depth-2 brickwork: valid = {report.ok}")

# a broken circuit: one gate reaches across two sites
bad = gc.circuit((6,), [[gc.gate("CZ", [(0,), (2,)])]])
print("deliberately non-local gate ->", gc.validate(bad).violations[0])

# light cones grow by at most one site per layer
for seed_site in [3, 6]:
    cone = sorted(q[0] for q in gc.light_cone(circ, [(seed_site,)], "forward"))
    print(f"forward cone of site {seed_site}: {cone}")

# a slice of width 2d separates the lattice: no gate connects back to front
sl = gc.Slice(0, 4, 8)
regions = gc.cut_regions(circ, sl)
print(f"slice [4,8): |B|={len(regions.back)} |M|={len(regions.middle)} |F|={len(regions.front)}")
fwd_b = gc.light_cone(circ, regions.back, "forward")
print("forward cone of B stays clear of F:", not (fwd_b & set(regions.front)))

# slice tilings used by the estimator (width 2d, spaced 2d apart)
slices = gc.enumerate_slices(circ, axis=0, slice_width=4, max_gap=4)
print("candidate slices:", [(s.lo, s.hi) for s in slices])
