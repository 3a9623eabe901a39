"""
Certifying a Werner state at reduced scale
==========================================

Fifty measurement directions per party are enough to walk the whole
pipeline: build a model with Frank-Wolfe, save it, then let the verifier
rebuild the correlators from the file and assemble the visibility bound.
Expect a couple of minutes of runtime.
"""

import tempfile
from pathlib import Path

import numpy as np

from lhvout.fw import FwConfig, build
from lhvout.geometry import final_visibility
from lhvout.polytope import write_model
from lhvout.quantum import hemisphere_grid, state_behaviour, werner_state, write_measurements
from lhvout.verifier import certify

# Pole plus four aligned rings in the upper hemisphere.
grid = hemisphere_grid(4, [6, 12, 15, 16], offsets=0)
v = 0.6
target = state_behaviour(werner_state(v), grid, grid)

# The heuristic oracle is much cheaper than enumerating 2^50 Alice strategies.
result = build(target, FwConfig(max_iters=30_000, eps_target=1e-3, lmo_mode="heuristic", restarts=8))
print(f"{result.iterations} oracle calls, epsilon {result.epsilon:.3g}, {len(result.model)} strategies")

work = Path(tempfile.mkdtemp())
write_model(result.model, work / "model.txt")
write_measurements(grid, work / "alice.txt")
write_measurements(grid, work / "bob.txt")

# Everything below reads only the files.
cert = certify(work / "model.txt", work / "alice.txt", work / "bob.txt", v)
print("\n".join(cert.lines()))

# For scale: the large 401-direction run reported elsewhere reaches this.
eta = np.cos(np.pi / 40) ** 2
print("reference run:", final_visibility(0.7071, 0.00019999656135527604, eta, eta).v_final)
