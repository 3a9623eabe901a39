import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lhvout", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lhvout")

CHSH = np.array([[1, 1], [1, -1]])


@pytest.fixture
def chsh():
    return CHSH.copy()


def brute_local_bound(M):
    """Direct maximum over every pair of sign vectors (independent of b-elimination)."""
    M = np.asarray(M)
    m, n = M.shape
    best = None
    for ai in range(2 ** m):
        a = np.array([1 - 2 * ((ai >> k) & 1) for k in range(m)])
        for bi in range(2 ** n):
            b = np.array([1 - 2 * ((bi >> k) & 1) for k in range(n)])
            v = a @ M @ b
            best = v if best is None or v > best else best
    return best


def brute_out_bound(M):
    """Loop over a, b+ and b- separately, evaluating sum M_xy a_x b_{y, a_x} term by term."""
    M = np.asarray(M)
    m, n = M.shape
    signs = lambda k, width: [1 - 2 * ((k >> j) & 1) for j in range(width)]
    best = None
    for ai in range(2 ** m):
        a = signs(ai, m)
        for pi in range(2 ** n):
            bp = signs(pi, n)
            for qi in range(2 ** n):
                bm = signs(qi, n)
                v = sum(M[x, y] * a[x] * (bp[y] if a[x] == 1 else bm[y]) for x in range(m) for y in range(n))
                best = v if best is None or v > best else best
    return best


def random_forced_out_model(seed, m_x=3, m_y=2, pool=40, mixes=3):
    """Random OUT model over a no-signalling behaviour whose Alice setting ``x'`` is deterministic.

    A pool of OUT strategies, all answering the forced outcome at ``x'``, is
    mixed by LP with the no-signalling equalities as constraints and random
    objectives; local strategies in the pool keep the LP feasible.  Returns
    ``(model, x_prime, outcome_sign)``.
    """
    from scipy.optimize import linprog

    from lhvout.behaviour import Scenario
    from lhvout.polytope import OUT, Model, _strategy_tables

    rng = np.random.default_rng(seed)
    s = Scenario(m_x, m_y)
    x_prime = int(rng.integers(m_x))
    forced = int(rng.integers(2))
    a = rng.integers(0, 2, size=(pool, m_x))
    a[:, x_prime] = forced
    b = rng.integers(0, 2, size=(pool, 2, m_y))
    local = rng.random(pool) < 0.25
    b[local, 1] = b[local, 0]
    swap = rng.random(pool) < 0.3  # add outcome-swapped partners, a common no-signalling pairing
    a = np.vstack([a, a[swap]])
    b = np.concatenate([b, b[swap][:, ::-1]])
    tables = _strategy_tables(OUT, s, a, b)  # (L, x, y, a, b)
    bob = tables.sum(axis=3)  # (L, x, y, b)
    rows = [(bob[:, x, y, o] - bob[:, 0, y, o]) for x in range(1, m_x) for y in range(m_y) for o in range(2)]
    a_eq = np.vstack(rows + [np.ones(len(a))])
    b_eq = np.append(np.zeros(len(rows)), 1.0)
    weights = np.zeros(len(a))
    for _ in range(mixes):
        res = linprog(rng.standard_normal(len(a)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        assert res.status == 0
        weights += np.clip(res.x, 0, None) / mixes
    keep = weights > 1e-12
    w = weights[keep] / weights[keep].sum()
    return Model(OUT, s, w, a[keep], b[keep]), x_prime, 1 - 2 * forced


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
