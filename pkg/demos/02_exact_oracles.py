"""The dense oracle: statevectors, reduced states, post-selection, spectra.

Everything downstream is checked against these exact computations.
"""
import numpy as np

from dncsim import geomcircuit as gc, oracle
from dncsim.harness import generate_circuit
from dncsim.synthesis import synthesis_of_circuit

# |<0|C|0>|^2 via statevector evolution, cross-checked against the full unitary
circ = generate_circuit({"kind": "brickwork", "dims": [8], "depth": 2, "seed": 7, "gates": "haar"})
v1 = oracle.output_probability(circ, "0" * 8)
U = oracle.circuit_unitary(circ)
print(f"|<0|C|0>|^2 = {v1:.10f}   (two independent paths differ by {abs(v1 - abs(U[0,0])**2):.1e})")

# the cut state rho_F: trace out the back, post-select the middle on zero
regions = gc.cut_regions(circ, gc.Slice(0, 2, 6))
sigma = oracle.reduced_state(circ, regions)
rho_F = oracle.postselect_zero(sigma, regions.middle)
print(f"tr sigma = {sigma.trace:.10f},  slice weight tr rho_F = {rho_F.trace:.6f}")

pairs = oracle.spectral(rho_F)
print("rho_F spectrum:", np.round([v for v, _ in pairs if v > 1e-12], 6))

# synthesis values: a circuit plus register roles (L traced, M -> 0, N output)
s = synthesis_of_circuit(circ)
print(f"synthesis value of the trivial synthesis = {oracle.synthesis_value_exact(s):.10f}")

bell = gc.circuit((2,), [[gc.gate("H", [(0,)])], [gc.gate("CNOT", [(0,), (1,)])]])
print(f"Bell circuit value = {oracle.synthesis_value_exact(synthesis_of_circuit(bell)):.6f} (= 1/2)")
