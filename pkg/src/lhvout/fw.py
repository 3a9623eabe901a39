"""Frank-Wolfe construction of outcome-communication models in correlator space.

The target is a zero-marginal correlator matrix ``p``.  Vertices of the
feasible polytope are the matrices ``S_xy = a_x b_{y, a_x}`` of deterministic
strategies, and ``f(q) = 1/2 ||q - p||_F^2`` is minimised over their convex
hull with exact line search.  The matrix ``q`` is tracked as a running sum;
the independent check lives in ``lhvout.verifier``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .behaviour import CorrelatorTable
from .bounds import EXACT_CAP, out_bound
from .errors import InvariantError, LhvOutError
from .polytope import Model

log = logging.getLogger(__name__)

PRUNE_WEIGHT = 1e-15
GAP_STOP = 1e-12


@dataclass
class FwConfig:
    max_iters: int = 1000
    eps_target: float = 1e-6
    lmo_mode: str = "exact"
    restarts: int = 16
    seed: int = 0
    exact_cap: int = EXACT_CAP
    variant: str = "plain"
    audit: bool = False  # rebuild q from the weights every iteration and compare

    def __post_init__(self):
        if self.max_iters < 1:
            raise LhvOutError("max_iters must be at least 1")
        if not self.eps_target > 0:
            raise LhvOutError("eps_target must be positive")
        if self.lmo_mode not in ("exact", "heuristic"):
            raise LhvOutError(f"unknown lmo mode {self.lmo_mode!r}")
        if self.restarts < 1:
            raise LhvOutError("need at least one restart")
        if self.variant not in ("plain", "pairwise"):
            raise LhvOutError(f"unknown Frank-Wolfe variant {self.variant!r}")


@dataclass
class FwResult:
    model: Model
    epsilon: float
    iterations: int
    fw_gap: float
    objective: list = field(default_factory=list, repr=False)
    q: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class Vertex:
    """Deterministic strategy in sign form, canonicalised so that ``a[0] = +1``."""

    a: np.ndarray
    bplus: np.ndarray
    bminus: np.ndarray

    @classmethod
    def canonical(cls, a, bplus, bminus):
        a, bplus, bminus = (np.asarray(v, dtype=np.int64) for v in (a, bplus, bminus))
        if a[0] < 0:
            a, bplus, bminus = -a, -bminus, -bplus
        return cls(a, bplus, bminus)

    def matrix(self):
        return np.where(self.a[:, None] > 0, self.bplus[None, :], -self.bminus[None, :]).astype(float)

    def key(self):
        return np.concatenate([self.a, self.bplus, self.bminus]).tobytes()

    def order_key(self):
        return tuple(np.concatenate([self.a, self.bplus, self.bminus]).tolist())


def _replies(G, a):
    plus = G[a > 0].sum(axis=0)
    minus = G[a < 0].sum(axis=0)
    bplus = np.where(plus >= 0, 1, -1)
    bminus = np.where(minus > 0, -1, 1)
    return np.abs(plus).sum() + np.abs(minus).sum(), bplus, bminus


def _ascend(G, a):
    """Best-improvement single-flip ascent on Alice's signs with Bob replying optimally."""
    a = a.copy()
    plus = G[a > 0].sum(axis=0)
    minus = G[a < 0].sum(axis=0)
    value = np.abs(plus).sum() + np.abs(minus).sum()
    while True:
        # moving row x to the other side shifts it between the two column sums
        moved = a[:, None] * G
        trial = (np.abs(plus[None, :] - moved).sum(axis=1)
                 + np.abs(minus[None, :] + moved).sum(axis=1))
        x = int(np.argmax(trial))
        if trial[x] <= value + 1e-12 * max(1.0, abs(value)):
            return a
        plus -= moved[x]
        minus += moved[x]
        a[x] = -a[x]
        value = trial[x]


def lmo(G, mode="exact", seed=0, restarts=16, cap=EXACT_CAP, warm=()):
    """Vertex maximising ``sum G_xy a_x b_{y, a_x}``; returns ``(vertex, value)``.

    ``exact`` enumerates ``2**(m-1)`` sign vectors.  ``heuristic`` keeps the
    best of ``restarts`` ascents (restart ``i`` seeded by ``(seed, i)``) plus
    ascents from any ``warm`` sign vectors; its value is a lower bound.
    """
    G = np.asarray(G, dtype=float)
    if mode == "exact":
        if G.shape[0] > cap:
            raise LhvOutError(f"exact LMO needs m <= {cap}, got {G.shape[0]}")
        value, a, bplus, bminus = out_bound(G, cap=cap, return_argmax=True)
        return Vertex.canonical(a, bplus, bminus), value
    if mode != "heuristic":
        raise LhvOutError(f"unknown lmo mode {mode!r}")
    starts = [np.asarray(w, dtype=np.int64) for w in warm]
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        starts.append(rng.choice(np.array([-1, 1]), size=G.shape[0]))
    best = None
    for a0 in starts:
        a = _ascend(G, a0)
        value, bplus, bminus = _replies(G, a)
        v = Vertex.canonical(a, bplus, bminus)
        cand = (value, v)
        if best is None or value > best[0] + 1e-12 or (
                abs(value - best[0]) <= 1e-12 and v.order_key() < best[1].order_key()):
            best = cand
    return best[1], float(best[0])


def _target_matrix(target):
    if isinstance(target, CorrelatorTable):
        if not target.has_zero_marginals(tol=1e-12):
            raise LhvOutError("Frank-Wolfe target must have zero marginals")
        p = np.array(target.correlators)
    else:
        p = np.asarray(target, dtype=float)
    if p.ndim != 2 or min(p.shape) < 1:
        raise LhvOutError("target needs at least one setting per party")
    return p


class _ActiveSet:
    """Vertices with their weights, stored as growing sign arrays.

    Inner products between vertex matrices only depend on how often the two
    Alice sign vectors agree, so ``<S_u, S_v>`` for every ``u`` costs
    ``O(m_x + m_y)`` per vertex rather than ``O(m_x m_y)``.
    """

    def __init__(self, m_x, m_y):
        self.size = 0
        self.a = np.zeros((16, m_x))
        self.bp = np.zeros((16, m_y))
        self.bm = np.zeros((16, m_y))
        self.w = np.zeros(16)
        self.index = {}
        self.keys = []

    def gram_row(self, v):
        """``<S_u, S_v>`` for every stored ``u``."""
        n = self.size
        up, um = (self.a[:n] > 0).astype(float), (self.a[:n] < 0).astype(float)
        vp, vm = (v.a > 0).astype(float), (v.a < 0).astype(float)
        c1, c2, c3, c4 = up @ vp, up @ vm, um @ vp, um @ vm
        bp, bm = self.bp[:n], self.bm[:n]
        return (c1 * (bp @ v.bplus) - c2 * (bp @ v.bminus)
                - c3 * (bm @ v.bplus) + c4 * (bm @ v.bminus))

    def add(self, v, weight):
        k = self.index.get(v.key())
        if k is not None:
            self.w[k] += weight
            return k, False
        if self.size == len(self.w):
            for name in ("a", "bp", "bm", "w"):
                arr = getattr(self, name)
                setattr(self, name, np.concatenate([arr, np.zeros_like(arr)]))
        k = self.size
        self.a[k], self.bp[k], self.bm[k], self.w[k] = v.a, v.bplus, v.bminus, weight
        self.index[v.key()] = k
        self.keys.append(v.key())
        self.size += 1
        return k, True

    def vertex(self, k):
        return Vertex(self.a[k].astype(np.int64), self.bp[k].astype(np.int64), self.bm[k].astype(np.int64))

    def compact(self, keep):
        """Retain the rows flagged in ``keep`` (a boolean array over stored rows)."""
        rows = np.flatnonzero(keep)
        for name in ("a", "bp", "bm", "w"):
            arr = getattr(self, name)
            kept = arr[rows]
            setattr(self, name, np.concatenate([kept, np.zeros((len(arr) - len(rows),) + arr.shape[1:])]))
        self.keys = [self.keys[i] for i in rows]
        self.index = {key: i for i, key in enumerate(self.keys)}
        self.size = len(rows)
        return rows

    def matrix(self):
        n = self.size
        picked = np.where(self.a[:n, :, None] > 0, self.bp[:n, None, :], -self.bm[:n, None, :])
        return np.tensordot(self.w[:n], picked, axes=1)


def _inner_with(active, p):
    """``<p, S_u>`` for every stored vertex."""
    n = active.size
    up = (active.a[:n] > 0).astype(float)
    plus = up @ p
    minus = (1.0 - up) @ p
    return np.sum(plus * active.bp[:n], axis=1) - np.sum(minus * active.bm[:n], axis=1)


def build(target, cfg=None):
    """Approximate ``target`` by a mixture of deterministic OUT strategies.

    Stops when the Frobenius distance reaches ``cfg.eps_target``, after
    ``cfg.max_iters`` iterations, or when the Frank-Wolfe gap falls below
    1e-12.  ``cfg.variant = "pairwise"`` moves weight from the active vertex
    worst aligned with the descent direction instead of shrinking all of
    them.  The returned model has both marginals fixed to zero.
    """
    cfg = cfg or FwConfig()
    p = _target_matrix(target)
    heuristic = cfg.lmo_mode == "heuristic"
    pairwise = cfg.variant == "pairwise"

    def oracle(G, warm, call):
        return lmo(G, cfg.lmo_mode, seed=cfg.seed + 7919 * call, restarts=cfg.restarts,
                   cap=cfg.exact_cap, warm=warm)

    v0, _ = oracle(p, (), 0)
    calls = 1
    active = _ActiveSet(*p.shape)
    active.add(v0, 1.0)
    # pairwise only: per-vertex <p, S_u> and <q, S_u>, kept current so the away step needs no matrix products
    with_p = _inner_with(active, p)
    with_q = active.gram_row(v0)
    q = v0.matrix()
    objective = [0.5 * np.sum((q - p) ** 2)]
    gap = np.inf
    last = v0
    while calls < cfg.max_iters and np.sqrt(2 * objective[-1]) > cfg.eps_target:
        G = p - q
        s, value = oracle(G, (last.a,) if heuristic else (), calls)
        calls += 1
        gap = value - np.sum(G * q)
        if gap < GAP_STOP:
            break
        k, fresh = active.add(s, 0.0)
        if pairwise:
            if fresh:
                with_p = np.append(with_p, np.sum(p * s.matrix()))
                with_q = np.append(with_q, active.w[:active.size] @ active.gram_row(s))
            s_row = active.gram_row(s)
            live = active.w[:active.size] > 0
            scores = np.where(live, with_p - with_q, np.inf)
            away = int(np.argmin(scores))
            d = s.matrix() - active.vertex(away).matrix()
            d_row = s_row - active.gram_row(active.vertex(away))
            cap = active.w[away]
        else:
            d = s.matrix() - q
            cap = 1.0
        dd = np.sum(d * d)
        gamma = min(max(np.sum(G * d) / dd, 0.0), cap) if dd > 0 else 0.0
        if pairwise:
            active.w[away] = 0.0 if gamma == cap else active.w[away] - gamma
        else:
            active.w[:active.size] *= 1.0 - gamma
        active.w[k] += gamma
        q = q + gamma * d
        dead = active.w[:active.size] < PRUNE_WEIGHT
        if pairwise:
            with_q = with_q + gamma * d_row
            if dead.any():
                with_p = with_p[~dead]
        if dead.any():
            active.compact(~dead)
            active.w[:active.size] /= active.w[:active.size].sum()
            q = active.matrix()
            if pairwise:
                with_q = _inner_with(active, q)
        if cfg.audit:
            w = active.w[:active.size]
            drift = np.abs(active.matrix() - q).max()
            if w.min() < 0 or abs(w.sum() - 1) > 1e-12 or drift > 1e-12:
                raise InvariantError(f"iterate {calls} is not the stated convex combination "
                                     f"(drift {drift:.3g}, weight sum {w.sum():.15g})")
        objective.append(0.5 * np.sum((q - p) ** 2))
        last = s
        if calls % 500 == 0:
            log.debug("call %d  eps %.3e  gap %.3e  active %d",
                      calls, np.sqrt(2 * objective[-1]), gap, active.size)
    n = active.size
    w = active.w[:n] / active.w[:n].sum()
    raw = Model.from_signs(w, active.a[:n].astype(np.int64), active.bp[:n].astype(np.int64),
                           active.bm[:n].astype(np.int64))
    epsilon = float(np.linalg.norm(q - p))
    return FwResult(fix_marginals(raw), epsilon, calls, float(gap), objective, q)


def correlator_matrix(model):
    """``sum_l w_l a_x b_{y, a_x}`` computed in one vectorised pass."""
    a = model.a_signs
    picked = np.where(a[:, :, None] > 0, model.bplus[:, None, :], -model.bminus[:, None, :])
    return np.tensordot(model.weights, picked, axes=1)


def nu_scaling(epsilon):
    """Visibility factor ``1 / (1 + epsilon)`` that turns an epsilon-close model into an exact one."""
    if epsilon < 0:
        raise LhvOutError("epsilon must be nonnegative")
    return 1.0 / (1.0 + epsilon)


def fix_marginals(model):
    """Pair every strategy with its global sign flip at half the weight.

    The copy answers ``-a_x`` and Bob replies to ``-a_x`` with the negation
    of what he originally answered to ``a_x``, so ``b+ -> -b-`` and
    ``b- -> -b+``.  Correlators are unchanged and both marginals vanish.
    Each copy directly follows its original in the output.
    """
    model = model.as_out()
    a, bp, bm = model.a_signs, model.bplus, model.bminus
    w = model.weights / 2

    def pair(first, second):
        # strategy l sits at row 2l and its flip at 2l + 1, so sequential sums cancel exactly
        return np.stack([first, second], axis=1).reshape(-1, *first.shape[1:])

    return Model.from_signs(pair(w, w), pair(a, -a), pair(bp, -bm), pair(bm, -bp), tol=model.tol)
