"""
The PR box with one bit of communication
========================================

The PR box wins the CHSH game every time, so no shared-randomness model
reproduces it.  If Bob also learns Alice's outcome, two deterministic
strategies are enough.
"""

import numpy as np

from lhvout.behaviour import to_correlators
from lhvout.bounds import local_bound, out_bound
from lhvout.polytope import LHV, OUT, membership, mixture_table, normalize_inequality
from lhvout.quantum import pr_box, pr_box_model

# The behaviour itself: p(ab|xy) = 1/2 when a xor b = xy.
box = pr_box()
print("correlators:\n", to_correlators(box).correlators)

# The two strategies, mixed equally, give back the table exactly.
model = pr_box_model()
print("max deviation of the two-strategy mixture:", np.abs(mixture_table(model) - box.table).max())

# The linear programs agree: inside the OUT polytope, outside the local one.
print("OUT member:", membership(box, OUT).member)
lhv = membership(box, LHV)
_, offset, scale = normalize_inequality(lhv.inequality, lhv.polytope_bound, bound_to=2.0)
print("separating inequality: local bound 2, PR value", (lhv.behaviour_value - offset) / scale)

# The same gap at the level of the CHSH expression.
chsh = np.array([[1, 1], [1, -1]])
print("CHSH local bound", local_bound(chsh), "and OUT bound", out_bound(chsh))
