"""Independent certification of outcome-communication models.

Nothing here reuses the Frank-Wolfe accumulation: correlators are rebuilt
strategy by strategy from the stored signs, in file order, so a model can be
checked against its target without trusting the code that produced it.
"""

from dataclasses import dataclass

import numpy as np

from .behaviour import CorrelatorTable
from .errors import InvariantError, LhvOutError, StageError
from .geometry import NONLOCALITY_THRESHOLD, final_visibility, hemisphere_radius, sphere_radius
from .fw import nu_scaling
from .polytope import OUT, read_model
from .quantum import double_set, read_measurements, state_behaviour, werner_state

POSITIVE = "nonlocal-but-LHV+Out"
NEGATIVE = "inconclusive"
BOB_MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    visibility: object  # geometry.VisibilityCertificate
    threshold: float
    verdict: str

    def lines(self):
        return self.visibility.lines() + [f"THRESHOLD {self.threshold!r}", f"VERDICT {self.verdict}"]


def _signs(arr, what):
    arr = np.asarray(arr)
    if not np.all((arr == 1) | (arr == -1)):
        raise InvariantError(f"Invalid element in a matrix ({what} must be +1 or -1)")
    return arr


def reconstruct(model, tol=1e-9):
    """Correlators and marginals of an OUT model, one strategy at a time."""
    if not model.scenario.dichotomic:
        raise LhvOutError("reconstruction needs dichotomic outcomes")
    model = model.as_out()
    w = np.asarray(model.weights, dtype=float)
    if w.min() < 0 or abs(w.sum() - 1.0) > tol:
        raise InvariantError(f"weights must be nonnegative and sum to 1 (sum {w.sum():.12g})")
    a = _signs(model.a_signs, "Alice assignments")
    bp = _signs(model.bplus, "Bob's replies to +1")
    bm = _signs(model.bminus, "Bob's replies to -1")
    m_x, m_y = a.shape[1], bp.shape[1]
    q = np.zeros((m_x, m_y))
    alice = np.zeros(m_x)
    bob_by_x = np.zeros((m_x, m_y))
    for lam in range(len(w)):
        weight = w[lam]
        for x in range(m_x):
            if a[lam, x] == 1:
                q[x] += weight * bp[lam]
                bob_by_x[x] += weight * bp[lam]
            else:
                q[x] -= weight * bm[lam]
                bob_by_x[x] += weight * bm[lam]
            alice[x] += weight * a[lam, x]
    spread = np.ptp(bob_by_x, axis=0).max()
    if spread > BOB_MARGINAL_TOL:
        raise InvariantError(f"Bob's marginal depends on Alice's setting (spread {spread:.3g})")
    return CorrelatorTable(alice, bob_by_x[0], q, tol=max(tol, 1e-9))


def distance(model, target):
    """Frobenius distance between reconstructed and target correlators."""
    got = reconstruct(model) if not isinstance(model, CorrelatorTable) else model
    want = target.correlators if isinstance(target, CorrelatorTable) else np.asarray(target, dtype=float)
    if got.correlators.shape != want.shape:
        raise LhvOutError(f"shape mismatch: model {got.correlators.shape} vs target {want.shape}")
    return float(np.linalg.norm(got.correlators - want))


def assemble(v_model, epsilon, eta_A, eta_B, threshold=NONLOCALITY_THRESHOLD):
    vis = final_visibility(v_model, epsilon, eta_A, eta_B)
    return Certificate(vis, threshold, POSITIVE if vis.v_final > threshold else NEGATIVE)


def certify(model_file, alice_file, bob_file, v_model, threshold=NONLOCALITY_THRESHOLD):
    """End-to-end certificate for a Werner-state model read from disk.

    Every failure is re-raised as ``StageError`` naming the stage it came from.
    """

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except LhvOutError as exc:
            raise StageError(name, str(exc)) from exc
        except OSError as exc:
            raise StageError(name, f"cannot read input: {exc}") from exc

    model = stage("load", read_model, model_file)
    alice = stage("load", read_measurements, alice_file)
    bob = stage("load", read_measurements, bob_file)
    if model.kind != OUT and model.kind is not None:
        model = model.as_out()
    if (model.scenario.m_x, model.scenario.m_y) != (len(alice), len(bob)):
        raise StageError("load", f"model has {model.scenario.m_x}x{model.scenario.m_y} settings, "
                                 f"measurement files give {len(alice)}x{len(bob)}")
    table = stage("reconstruct", reconstruct, model)
    target = stage("target", lambda: state_behaviour(werner_state(v_model), alice, bob))
    eps = stage("distance", distance, table, target)
    stage("nu", nu_scaling, eps)
    eta_a = stage("eta_A", hemisphere_radius, alice)
    eta_b = stage("eta_B", lambda: sphere_radius(double_set(bob)))
    return stage("final", assemble, v_model, eps, eta_a, eta_b, threshold)
