"""
Looking for an antipodal counterexample
=======================================

Suppose Alice's second block of settings repeats the first with outcomes
swapped.  Can such a behaviour have an outcome-communication model but no
local one?  This script samples behaviours on the positivity boundary and
also tries every symmetrised vertex of small scenarios.
"""

from lhvout.behaviour import Scenario, antipodal_extend
from lhvout.openq import check_implication, exhaustive_vertices, sweep
from lhvout.quantum import pr_box

# Mirroring the PR box destroys its OUT model as well as its local one.
report = check_implication(antipodal_extend(pr_box()))
print("extended PR box: OUT", report.out_member, "LHV", report.lhv_member)

# Random boundary behaviours; scenarios are given before doubling Alice's settings.
for mx, my in [(1, 2), (2, 2)]:
    summary = sweep(Scenario(mx, my), 500, seed=1)
    print(f"sampled base {mx}x{my}:", ", ".join(summary.lines()))

# Symmetrised OUT vertices; those that still signal are skipped.
for mx, my in [(1, 2), (2, 1)]:
    print(f"vertices of base {mx}x{my}:", ", ".join(exhaustive_vertices(Scenario(mx, my)).lines()))
