"""Bell scenarios, probability tables and the correlator representation.

Tables are stored settings-major as arrays of shape ``(m_x, m_y, n_a, n_b)``,
indexed ``table[x, y, a, b] = p(ab|xy)``.  For dichotomic parties the outcome
index 0 stands for the value +1 and index 1 for -1.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _text
from .errors import InvariantError, LhvOutError

SIGNS = np.array([1.0, -1.0])
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    m_x: int
    m_y: int
    n_a: int = 2
    n_b: int = 2

    def __post_init__(self):
        for name in ("m_x", "m_y", "n_a", "n_b"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvariantError(f"{name} must be a positive integer, got {value}")

    @property
    def shape(self):
        return (self.m_x, self.m_y, self.n_a, self.n_b)

    @property
    def dichotomic(self):
        return self.n_a == 2 and self.n_b == 2


@dataclass(frozen=True, eq=False)
class Behaviour:
    """A conditional probability table ``p(ab|xy)``."""

    scenario: Scenario
    table: np.ndarray = field(repr=False)
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.shape != self.scenario.shape:
            raise InvariantError(f"table shape {table.shape} does not match {self.scenario.shape}")
        if not np.all(np.isfinite(table)):
            raise InvariantError("table has non-finite entries")
        if table.min() < -self.tol:
            raise InvariantError(f"negative probability {table.min():.3g}")
        norm_err = np.abs(table.sum(axis=(2, 3)) - 1.0).max()
        if norm_err > self.tol:
            raise InvariantError(f"p(.|xy) not normalised (error {norm_err:.3g})")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_array(cls, table, tol=DEFAULT_TOL):
        table = np.asarray(table, dtype=float)
        return cls(Scenario(*table.shape), table, tol)

    def __eq__(self, other):
        return (isinstance(other, Behaviour) and self.scenario == other.scenario
                and np.array_equal(self.table, other.table))

    def alice_marginal(self, y=0):
        """``p_A(a|x)`` computed at Bob setting ``y``, shape ``(m_x, n_a)``."""
        return self.table[:, y].sum(axis=2)

    def bob_marginal(self, x=0):
        """``p_B(b|y)`` computed at Alice setting ``x``, shape ``(m_y, n_b)``."""
        return self.table[x].sum(axis=1)


@dataclass(frozen=True, eq=False)
class CorrelatorTable:
    """Marginal and two-body correlators of a dichotomic behaviour."""

    alice: np.ndarray
    bob: np.ndarray
    correlators: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        alice = np.array(self.alice, dtype=float).reshape(-1)
        bob = np.array(self.bob, dtype=float).reshape(-1)
        corr = np.array(self.correlators, dtype=float)
        if corr.shape != (alice.size, bob.size):
            raise InvariantError(f"correlator block {corr.shape} does not match "
                                 f"marginals ({alice.size}, {bob.size})")
        for arr in (alice, bob, corr):
            if not np.all(np.isfinite(arr)) or (arr.size and np.abs(arr).max() > 1 + self.tol):
                raise InvariantError("correlators must lie in [-1, 1]")
        worst = _expansion(alice, bob, corr).min()
        if worst < -self.tol:
            raise InvariantError(f"correlators give a negative probability ({worst / 4:.3g})")
        for arr in (alice, bob, corr):
            arr.setflags(write=False)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "correlators", corr)

    @classmethod
    def zero_marginals(cls, correlators, tol=DEFAULT_TOL):
        corr = np.asarray(correlators, dtype=float)
        return cls(np.zeros(corr.shape[0]), np.zeros(corr.shape[1]), corr, tol)

    @property
    def m_x(self):
        return self.alice.size

    @property
    def m_y(self):
        return self.bob.size

    def has_zero_marginals(self, tol=0.0):
        return bool(np.abs(self.alice).max(initial=0) <= tol
                    and np.abs(self.bob).max(initial=0) <= tol)


def _expansion(alice, bob, corr):
    """``1 + a<a_x> + b<b_y> + ab<a_x b_y>`` with axes ``(x, y, a, b)``."""
    a = SIGNS[:, None]
    b = SIGNS[None, :]
    return (1.0 + a * alice[:, None, None, None] + b * bob[None, :, None, None]
            + a * b * corr[:, :, None, None])


def is_nonsignalling(b, tol=DEFAULT_TOL):
    """Check both no-signalling conditions; returns ``(ok, max_violation)``."""
    p_a = b.table.sum(axis=3)  # (x, y, a)
    p_b = b.table.sum(axis=2)  # (x, y, b)
    viol_a = np.ptp(p_a, axis=1).max()
    viol_b = np.ptp(p_b, axis=0).max()
    violation = float(max(viol_a, viol_b))
    return violation <= tol, violation


def to_correlators(b, tol=DEFAULT_TOL):
    if not b.scenario.dichotomic:
        raise LhvOutError("correlator form needs n_a = n_b = 2")
    ok, violation = is_nonsignalling(b, tol)
    if not ok:
        raise LhvOutError(f"behaviour is signalling (violation {violation:.3g})")
    alice = b.alice_marginal() @ SIGNS
    bob = b.bob_marginal() @ SIGNS
    corr = np.einsum("xyab,a,b->xy", b.table, SIGNS, SIGNS)
    return CorrelatorTable(alice, bob, corr, tol=max(tol, b.tol))


def from_correlators(c):
    table = _expansion(c.alice, c.bob, c.correlators) / 4.0
    if table.min() < -c.tol:
        raise InvariantError("correlator expansion has a negative term")
    return Behaviour(Scenario(c.m_x, c.m_y), np.clip(table, 0.0, None), tol=c.tol)


def check_antipodal(b, tol=DEFAULT_TOL):
    """Whether ``p(ab|xy) = p(-a, b|x + m, y)`` with ``2m`` Alice settings."""
    s = b.scenario
    if s.n_a != 2:
        raise LhvOutError("antipodal symmetry needs dichotomic Alice")
    if s.m_x % 2:
        raise LhvOutError(f"antipodal symmetry needs an even number of Alice settings, got {s.m_x}")
    half = s.m_x // 2
    t = b.table
    return bool(np.abs(t[half:] - t[:half, :, ::-1, :]).max() <= tol)


def antipodal_extend(b):
    """Append the outcome-swapped copy of every Alice setting."""
    s = b.scenario
    if s.n_a != 2:
        raise LhvOutError("antipodal extension needs dichotomic Alice")
    table = np.concatenate([b.table, b.table[:, :, ::-1, :]], axis=0)
    return Behaviour(Scenario(2 * s.m_x, s.m_y, s.n_a, s.n_b), table, tol=b.tol)


def uniform(s):
    return Behaviour(s, np.full(s.shape, 1.0 / (s.n_a * s.n_b)))


def _random_ns_table(s, rng, spread):
    """Random point of the no-signalling affine subspace (entries may be negative)."""
    p_a = rng.dirichlet(np.ones(s.n_a), size=s.m_x)
    p_b = rng.dirichlet(np.ones(s.n_b), size=s.m_y)
    na, nb = s.n_a - 1, s.n_b - 1
    joint = (p_a[:, None, :na, None] * p_b[None, :, None, :nb]
             + spread * rng.uniform(-1, 1, size=(s.m_x, s.m_y, na, nb)))
    t = np.empty(s.shape)
    t[:, :, :na, :nb] = joint
    t[:, :, :na, nb] = p_a[:, None, :na] - joint.sum(axis=3)
    t[:, :, na, :nb] = p_b[None, :, :nb] - joint.sum(axis=2)
    t[:, :, na, nb] = 0.0
    t[:, :, na, nb] = 1.0 - t.sum(axis=(2, 3))
    return t


def random_nonsignalling(s, seed, antipodal=False, spread=0.5):
    """Random no-signalling behaviour pushed onto the positivity boundary.

    A random point of the no-signalling subspace is mixed with the uniform
    behaviour using the smallest uniform weight that makes it nonnegative.
    With ``antipodal=True`` the first half of Alice's settings is sampled and
    the second half is its outcome-swapped copy.
    """
    rng = np.random.default_rng(seed)
    if antipodal:
        if s.n_a != 2 or s.m_x % 2:
            raise LhvOutError("antipodal sampling needs n_a = 2 and an even m_x")
        base = Scenario(s.m_x // 2, s.m_y, s.n_a, s.n_b)
        t = _random_ns_table(base, rng, spread)
        t = np.concatenate([t, t[:, :, ::-1, :]], axis=0)
    else:
        t = _random_ns_table(s, rng, spread)
    u = 1.0 / (s.n_a * s.n_b)
    low = t.min()
    if low < 0:
        weight = u / (u - low)
        t = weight * t + (1 - weight) * u
        t[np.abs(t) < 1e-15] = 0.0
    return Behaviour(s, np.clip(t, 0.0, None))


def read_behaviour(source, tol=DEFAULT_TOL):
    lines = _text.content_lines(source)
    _text.expect_magic(lines, "BEHAVIOUR 1")
    if len(lines) < 2:
        raise LhvOutError("behaviour file missing scenario line")
    h = _text.parse_header(lines[1], ("mx", "my", "na", "nb"))
    s = Scenario(h["mx"], h["my"], h["na"], h["nb"])
    values = np.array(" ".join(lines[2:]).split(), dtype=float)
    if values.size != np.prod(s.shape):
        raise LhvOutError(f"expected {np.prod(s.shape)} probabilities, got {values.size}")
    return Behaviour(s, values.reshape(s.shape), tol=tol)


def write_behaviour(b, path):
    s = b.scenario
    lines = ["BEHAVIOUR 1", f"mx {s.m_x} my {s.m_y} na {s.n_a} nb {s.n_b}",
             "# p(ab|xy) in (x, y, a, b) row-major order"]
    for x in range(s.m_x):
        for y in range(s.m_y):
            lines.append(" ".join(_text.fmt(v) for v in b.table[x, y].ravel()))
    _text.write_text(path, lines)
