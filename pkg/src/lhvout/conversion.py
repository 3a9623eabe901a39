"""Turning an outcome-communication model into a purely local one.

If some Alice setting ``x'`` has a deterministic marginal and the behaviour is
no-signalling, every strategy with positive weight must output the forced
outcome at ``x'``.  Bob then learns nothing from the announced outcome that
changes the statistics: replacing his response by the one he gives after the
forced outcome reproduces the same behaviour without communication.
"""

from dataclasses import dataclass

import numpy as np

from .behaviour import SIGNS, is_nonsignalling
from .errors import LhvOutError
from .polytope import LHV, Model, mixture_table

ZERO_WEIGHT = 1e-12


@dataclass(frozen=True)
class DeterministicInputWitness:
    x_prime: int
    fixed_outcome: int  # +1 or -1

    def __post_init__(self):
        if self.fixed_outcome not in (1, -1):
            raise LhvOutError("fixed_outcome must be +1 or -1")

    @property
    def outcome_index(self):
        return 0 if self.fixed_outcome == 1 else 1


def find_deterministic_input(b, tol=1e-9):
    """First Alice setting whose marginal is deterministic, or ``None``."""
    if b.scenario.n_a != 2:
        raise LhvOutError("needs dichotomic Alice outcomes")
    p_a = b.alice_marginal()
    for x in range(b.scenario.m_x):
        k = int(np.argmax(p_a[x]))
        if p_a[x, k] >= 1 - tol:
            return DeterministicInputWitness(x, int(SIGNS[k]))
    return None


def convert(model, w, tol=1e-9):
    """LHV model with the same weights and Alice strategies as ``model``.

    Bob's response in each strategy becomes the one he gives after Alice
    announces ``w.fixed_outcome``.  Raises if the reproduced behaviour is
    signalling or a positive-weight strategy disagrees with the witness.
    """
    model = model.as_out()
    s = model.scenario
    if s.n_a != 2:
        raise LhvOutError("needs dichotomic Alice outcomes")
    if not 0 <= w.x_prime < s.m_x:
        raise LhvOutError(f"witness setting {w.x_prime} out of range")
    table = mixture_table(model)
    ok, violation = is_nonsignalling(model.behaviour(), tol)
    if not ok:
        raise LhvOutError(f"model reproduces a signalling behaviour (violation {violation:.3g})")
    live = model.weights > ZERO_WEIGHT
    off = live & (model.a[:, w.x_prime] != w.outcome_index)
    if off.any():
        raise LhvOutError(
            f"{int(off.sum())} positive-weight strategies output {-w.fixed_outcome:+d} "
            f"at setting {w.x_prime}; the witness is false for this model")
    out = Model(LHV, s, model.weights, model.a, model.b[:, w.outcome_index, :], model.tol)
    err = np.abs(mixture_table(out) - table).max()
    if err > tol:
        raise LhvOutError(f"converted model deviates by {err:.3g}")
    return out
