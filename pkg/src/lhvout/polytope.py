"""Deterministic strategies, mixtures of them, and LP membership tests.

Two polytopes are handled: LHV (Bob's response depends on his setting only)
and OUT (Bob's response may also depend on Alice's outcome).  Membership is
decided by an L1-distance linear program whose dual is a separating Bell
inequality whenever the behaviour lies outside.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import _text
from .behaviour import SIGNS, Behaviour, Scenario
from .errors import CapExceededError, InvariantError, LhvOutError

LHV = "LHV"
OUT = "OUT"
KINDS = (LHV, OUT)
DEFAULT_CAP = 2 ** 24
FULL_LP_LIMIT = 4096
WEIGHT_TOL = 1e-9


class LpError(LhvOutError):
    """The membership LP did not give a trustworthy answer."""


@dataclass(frozen=True)
class LhvStrategy:
    a_assign: tuple
    b_assign: tuple


@dataclass(frozen=True)
class OutStrategy:
    """``b_assign[a][y]`` is Bob's outcome for setting ``y`` after Alice reports ``a``."""

    a_assign: tuple
    b_assign: tuple


def _check_kind(kind):
    if kind not in KINDS:
        raise LhvOutError(f"kind must be one of {KINDS}, got {kind!r}")


@dataclass(frozen=True, eq=False)
class Model:
    """Convex mixture of deterministic strategies stored as index arrays.

    ``a`` has shape ``(L, m_x)``; ``b`` has shape ``(L, m_y)`` for LHV models
    and ``(L, n_a, m_y)`` for OUT models.
    """

    kind: str
    scenario: Scenario
    weights: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tol: float = field(default=WEIGHT_TOL, repr=False)

    def __post_init__(self):
        _check_kind(self.kind)
        s = self.scenario
        w = np.array(self.weights, dtype=float).reshape(-1)
        a = np.array(self.a, dtype=np.int64).reshape(w.size, s.m_x)
        b_shape = (w.size, s.m_y) if self.kind == LHV else (w.size, s.n_a, s.m_y)
        b = np.array(self.b, dtype=np.int64).reshape(b_shape)
        if w.size == 0:
            raise InvariantError("model has no strategies")
        if w.min() < 0:
            raise InvariantError(f"negative weight {w.min():.3g}")
        if abs(w.sum() - 1.0) > self.tol:
            raise InvariantError(f"weights sum to {w.sum():.12g}, not 1")
        if a.min() < 0 or a.max() >= s.n_a or b.min() < 0 or b.max() >= s.n_b:
            raise InvariantError("outcome index out of range")
        for arr in (w, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self):
        return self.weights.size

    @classmethod
    def from_signs(cls, weights, a, bplus, bminus=None, tol=WEIGHT_TOL):
        """Dichotomic model from ``+-1`` assignments (correlator form).

        Without ``bminus`` the result is an LHV model with Bob assignment ``bplus``.
        """
        a, bplus = _sign_array(a), _sign_array(bplus)
        s = Scenario(a.shape[1], bplus.shape[1])
        a_idx = (1 - a) // 2
        if bminus is None:
            return cls(LHV, s, weights, a_idx, (1 - bplus) // 2, tol)
        bminus = _sign_array(bminus)
        b_idx = np.stack([(1 - bplus) // 2, (1 - bminus) // 2], axis=1)
        return cls(OUT, s, weights, a_idx, b_idx, tol)

    @property
    def strategies(self):
        if self.kind == LHV:
            return [LhvStrategy(tuple(a), tuple(b)) for a, b in zip(self.a.tolist(), self.b.tolist())]
        return [OutStrategy(tuple(a), tuple(map(tuple, b))) for a, b in zip(self.a.tolist(), self.b.tolist())]

    def _require_dichotomic(self):
        if not self.scenario.dichotomic:
            raise LhvOutError("correlator form needs a dichotomic scenario")

    @property
    def a_signs(self):
        self._require_dichotomic()
        return SIGNS[self.a].astype(np.int64)

    @property
    def bplus(self):
        self._require_dichotomic()
        b = self.b if self.kind == LHV else self.b[:, 0]
        return SIGNS[b].astype(np.int64)

    @property
    def bminus(self):
        self._require_dichotomic()
        b = self.b if self.kind == LHV else self.b[:, 1]
        return SIGNS[b].astype(np.int64)

    def as_out(self):
        """The same mixture viewed as an OUT model (Bob ignores Alice's outcome)."""
        if self.kind == OUT:
            return self
        b = np.repeat(self.b[:, None, :], self.scenario.n_a, axis=1)
        return Model(OUT, self.scenario, self.weights, self.a, b, self.tol)

    def behaviour(self):
        return Behaviour(self.scenario, mixture_table(self), tol=max(1e-9, 10 * self.tol))


def _sign_array(v):
    v = np.atleast_2d(np.asarray(v))
    if not np.all(np.isin(v, (-1, 1))):
        raise InvariantError("Invalid element in a matrix: entries must be +1 or -1")
    return v.astype(np.int64)


def _strategy_tables(kind, s, a, b):
    """0/1 tables ``(V, m_x, m_y, n_a, n_b)`` for index arrays of strategies."""
    oa = np.eye(s.n_a)[a]  # (V, x, a)
    if kind == LHV:
        ob = np.eye(s.n_b)[b]  # (V, y, b)
        return np.einsum("vxa,vyb->vxyab", oa, ob)
    ob = np.eye(s.n_b)[b]  # (V, a, y, b)
    return np.einsum("vxa,vayb->vxyab", oa, ob)


def mixture_table(model):
    t = _strategy_tables(model.kind, model.scenario, model.a, model.b)
    return np.tensordot(model.weights, t, axes=1)


def vertex_count(s, kind):
    _check_kind(kind)
    if kind == LHV:
        return s.n_a ** s.m_x * s.n_b ** s.m_y
    return s.n_a ** s.m_x * s.n_b ** (s.n_a * s.m_y)


def _assignments(n_out, length):
    """All outcome tuples of ``length`` in lexicographic order, shape ``(n_out**length, length)``."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n_out,) * length).reshape(length, -1).T
    return grids.astype(np.int64)


def vertex_arrays(s, kind, cap=DEFAULT_CAP):
    """Index arrays ``(a, b)`` of every vertex in lexicographic ``(a, b)`` order."""
    count = vertex_count(s, kind)
    if count > cap:
        raise CapExceededError(f"{count} {kind} vertices exceed the cap {cap}")
    a_all = _assignments(s.n_a, s.m_x)
    if kind == LHV:
        b_all = _assignments(s.n_b, s.m_y)
    else:
        b_all = _assignments(s.n_b, s.n_a * s.m_y).reshape(-1, s.n_a, s.m_y)
    a = np.repeat(a_all, len(b_all), axis=0)
    b = np.tile(b_all, (len(a_all),) + (1,) * (b_all.ndim - 1))
    return a, b


def enumerate_vertices(s, kind, cap=DEFAULT_CAP):
    a, b = vertex_arrays(s, kind, cap)
    if kind == LHV:
        return [LhvStrategy(tuple(x), tuple(y)) for x, y in zip(a.tolist(), b.tolist())]
    return [OutStrategy(tuple(x), tuple(map(tuple, y))) for x, y in zip(a.tolist(), b.tolist())]


def strategy_behaviour(st, s):
    if isinstance(st, LhvStrategy):
        kind, b = LHV, np.array([st.b_assign])
    elif isinstance(st, OutStrategy):
        kind, b = OUT, np.array([st.b_assign])
    else:
        raise LhvOutError(f"not a strategy: {st!r}")
    a = np.array([st.a_assign])
    if a.shape[1] != s.m_x or b.shape[-1] != s.m_y:
        raise LhvOutError("strategy does not match the scenario")
    return Behaviour(s, _strategy_tables(kind, s, a, b)[0])


def best_response(c, kind, a_cap=2 ** 20):
    """Vertex maximising ``sum c[x,y,a,b] p(ab|xy)``; returns ``(value, a, b)``.

    Alice's assignments are enumerated; Bob's best reply is read off per
    setting (and per announced outcome for OUT).  Ties go to the first
    assignment in lexicographic order.
    """
    m_x, m_y, n_a, n_b = c.shape
    count = n_a ** m_x
    if count > a_cap:
        raise CapExceededError(f"{count} Alice assignments exceed the oracle cap {a_cap}")
    a_all = _assignments(n_a, m_x)
    # picked[k, x, y, b] = c[x, y, a_all[k, x], b]
    picked = c[np.arange(m_x)[None, :], :, a_all, :]
    if kind == LHV:
        scores = picked.sum(axis=1)  # (k, y, b)
        values = scores.max(axis=2).sum(axis=1)
        k = int(np.argmax(values))
        return float(values[k]), a_all[k], scores[k].argmax(axis=1)
    onehot = np.eye(n_a)[a_all]  # (k, x, a)
    scores = np.einsum("kxa,kxyb->kayb", onehot, picked)
    values = scores.max(axis=3).sum(axis=(1, 2))
    k = int(np.argmax(values))
    return float(values[k]), a_all[k], scores[k].argmax(axis=2)


@dataclass
class MembershipResult:
    member: bool
    kind: str
    model: Model = None
    inequality: np.ndarray = None
    polytope_bound: float = None
    behaviour_value: float = None
    distance: float = 0.0

    @property
    def violation(self):
        if self.member:
            return 0.0
        return self.behaviour_value - self.polytope_bound


def _solve_l1(vt, target):
    """min ||target - vt.T p||_1 over the simplex; returns (res, p, y, z)."""
    n_v, dim = vt.shape
    eye = np.eye(dim)
    a_eq = np.zeros((dim + 1, n_v + 2 * dim))
    a_eq[:dim, :n_v] = vt.T
    a_eq[:dim, n_v:n_v + dim] = eye
    a_eq[:dim, n_v + dim:] = -eye
    a_eq[dim, :n_v] = 1.0
    b_eq = np.append(target, 1.0)
    cost = np.concatenate([np.zeros(n_v), np.ones(2 * dim)])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise LpError(f"membership LP failed: {res.message}")
    duals = res.eqlin.marginals
    return res, res.x[:n_v], duals[:dim], duals[dim]


def _initial_columns(b, kind, n_start=8, seed=0):
    s = b.scenario
    rng = np.random.default_rng(seed)
    cols_a, cols_b = [], []
    directions = [b.table - 1.0 / (s.n_a * s.n_b)]
    directions += [rng.standard_normal(s.shape) for _ in range(n_start - 1)]
    for c in directions:
        _, a, bb = best_response(c, kind)
        cols_a.append(a)
        cols_b.append(bb)
    return cols_a, cols_b


def membership(b, kind, tol=1e-9, cap=DEFAULT_CAP, full_limit=FULL_LP_LIMIT, max_rounds=10000):
    """Decide whether ``b`` lies in the LHV or OUT polytope.

    Small polytopes are handled with every vertex as an LP column; larger ones
    by column generation with ``best_response`` as the pricing oracle.  A
    member result carries a mixture reproducing ``b`` within ``tol`` in max
    norm; a non-member result carries the dual inequality with its exact
    polytope bound recomputed by the oracle.
    """
    _check_kind(kind)
    s = b.scenario
    count = vertex_count(s, kind)
    if count > cap:
        raise CapExceededError(f"{count} {kind} vertices exceed the cap {cap}")
    target = b.table.ravel()
    if count <= full_limit:
        va, vb = vertex_arrays(s, kind, cap)
        vt = _strategy_tables(kind, s, va, vb).reshape(len(va), -1)
        res, p, y, z = _solve_l1(vt, target)
    else:
        cols_a, cols_b = _initial_columns(b, kind)
        va, vb = np.array(cols_a), np.array(cols_b)
        for _ in range(max_rounds):
            vt = _strategy_tables(kind, s, va, vb).reshape(len(va), -1)
            res, p, y, z = _solve_l1(vt, target)
            best, a_new, b_new = best_response(y.reshape(s.shape), kind)
            if best + z <= 1e-10:
                break
            va = np.vstack([va, a_new[None]])
            vb = np.concatenate([vb, b_new[None]])
        else:
            raise LpError("column generation did not converge")
    distance = float(res.fun)
    if distance <= max(tol, 1e-12) * target.size:
        keep = p > 0
        w = p[keep] / p[keep].sum()
        model = Model(kind, s, w, va[keep], vb[keep])
        err = np.abs(mixture_table(model) - b.table).max()
        if err <= tol:
            return MembershipResult(True, kind, model=model, distance=distance)
    ineq = y.reshape(s.shape)
    bound, _, _ = best_response(ineq, kind)
    value = float(np.sum(ineq * b.table))
    if value - bound > tol:
        return MembershipResult(False, kind, inequality=ineq, polytope_bound=bound,
                                behaviour_value=value, distance=distance)
    raise LpError(f"inconclusive membership LP (distance {distance:.3g}, "
                  f"violation {value - bound:.3g})")


def normalize_inequality(ineq, bound, bound_to=1.0):
    """Shift so the uniform behaviour scores 0, then scale the bound to ``bound_to``.

    Returns ``(inequality, offset, scale)``; a behaviour value ``v`` of the raw
    inequality becomes ``(v - offset) / scale``.  ``bound_to=2`` puts a CHSH
    facet in its usual form (local bound 2, PR box 4).
    """
    ineq = np.asarray(ineq, dtype=float)
    per_setting = ineq.mean(axis=(2, 3), keepdims=True)
    offset = float(per_setting.sum())
    scale = (bound - offset) / bound_to
    if scale <= 0:
        raise LhvOutError("inequality bound does not exceed the uniform value")
    return (ineq - per_setting) / scale, offset, scale


def read_model(source, tol=WEIGHT_TOL):
    lines = _text.content_lines(source)
    magic = _text.expect_magic(lines, "LHVOUT-MODEL 1", "LHV-MODEL 1")
    kind = OUT if magic.startswith("LHVOUT") else LHV
    tokens = lines[1].split() if len(lines) > 1 else []
    keys = ("mx", "my", "L") if len(tokens) == 6 else ("mx", "my", "L", "na", "nb")
    h = _text.parse_header(lines[1], keys)
    s = Scenario(h["mx"], h["my"], h.get("na", 2), h.get("nb", 2))
    L = h["L"]
    sections, current = {}, None
    for line in lines[2:]:
        if line.replace("-", "").isalpha() and line.isupper():
            current = line
            sections[current] = []
        elif current is None:
            raise LhvOutError(f"data before any section: {line!r}")
        else:
            sections[current].append(line)

    def block(name, width, dtype=float):
        if name not in sections:
            raise LhvOutError(f"missing section {name}")
        rows = sections[name]
        try:
            arr = np.array([r.split() for r in rows], dtype=dtype)
        except ValueError as exc:
            raise LhvOutError(f"bad entry in section {name}: {exc}") from exc
        if arr.shape != (L, width):
            raise LhvOutError(f"section {name} should be {L}x{width}, got {arr.shape}")
        return arr

    weights = block("WEIGHTS", 1)[:, 0]
    if "A-IDX" in sections:
        a = block("A-IDX", s.m_x, np.int64)
        if kind == LHV:
            b = block("B-IDX", s.m_y, np.int64)
        else:
            b = block("B-IDX", s.n_a * s.m_y, np.int64).reshape(L, s.n_a, s.m_y)
        return Model(kind, s, weights, a, b, tol)
    a = block("A", s.m_x, np.int64)
    if kind == LHV:
        return Model.from_signs(weights, a, block("B", s.m_y, np.int64), tol=tol)
    return Model.from_signs(weights, a, block("BPLUS", s.m_y, np.int64),
                            block("BMINUS", s.m_y, np.int64), tol=tol)


def write_model(model, path):
    s = model.scenario
    magic = "LHVOUT-MODEL 1" if model.kind == OUT else "LHV-MODEL 1"
    header = f"mx {s.m_x} my {s.m_y} L {len(model)}"
    if not s.dichotomic:
        header += f" na {s.n_a} nb {s.n_b}"
    lines = [magic, header, "WEIGHTS"]
    lines += [_text.fmt(w) for w in model.weights]

    def rows(arr):
        return [" ".join(f"{int(v):+d}" if s.dichotomic else str(int(v)) for v in r) for r in arr]

    if s.dichotomic:
        lines += ["A"] + rows(model.a_signs)
        if model.kind == LHV:
            lines += ["B"] + rows(model.bplus)
        else:
            lines += ["BPLUS"] + rows(model.bplus) + ["BMINUS"] + rows(model.bminus)
    else:
        lines += ["A-IDX"] + rows(model.a)
        lines += ["B-IDX"] + rows(model.b.reshape(len(model), -1))
    _text.write_text(path, lines)

