"""Classical bounds of full-correlator Bell expressions ``sum M_xy <A_x B_y>``.

Exact bounds enumerate Alice's sign vectors with Bob's reply eliminated in
closed form.  Integer coefficient matrices are summed in int64, so bounds and
comparisons between them are exact; for float input the accumulated rounding
is below ``m * n * max|M| * 2**-50``.
"""

from dataclasses import dataclass

import numpy as np

from . import _text
from .errors import CapExceededError, LhvOutError

EXACT_CAP = 26
BRUTE_CAP = 24
CHUNK = 1 << 16


def as_coefficients(M):
    M = np.asarray(M)
    if M.ndim != 2 or min(M.shape) < 1:
        raise LhvOutError(f"coefficient matrix must be 2-D and nonempty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise LhvOutError("coefficient matrix has non-finite entries")
    if np.issubdtype(M.dtype, np.integer) or (np.all(M == np.round(M)) and np.abs(M).max() < 2 ** 40):
        return M.astype(np.int64)
    return M.astype(float)


def sign_vectors(m, start=0, stop=None, fix_first=True):
    """Rows ``start:stop`` of the sign vectors of length ``m`` in lexicographic order.

    Bit ``m-1-i`` of the row index set means ``a_i = -1``; with ``fix_first``
    only vectors with ``a_0 = +1`` are produced (``2**(m-1)`` of them).
    """
    free = m - 1 if fix_first else m
    total = 1 << free
    stop = total if stop is None else min(stop, total)
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(free - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    signs = 1 - 2 * bits
    if fix_first:
        signs = np.hstack([np.ones((len(idx), 1), dtype=np.int64), signs])
    return signs


def _chunks(m, cap):
    if m > cap:
        raise CapExceededError(f"m = {m} exceeds the exact enumeration cap {cap}")
    total = 1 << (m - 1)
    for start in range(0, total, CHUNK):
        yield sign_vectors(m, start, start + CHUNK)


def local_bound(M, cap=EXACT_CAP, return_argmax=False):
    """``max sum M_xy a_x b_y`` over sign vectors ``a``, ``b``."""
    M = as_coefficients(M)
    best, best_a = None, None
    for signs in _chunks(M.shape[0], cap):
        values = np.abs(signs.astype(M.dtype) @ M).sum(axis=1)
        k = int(np.argmax(values))
        if best is None or values[k] > best:
            best, best_a = values[k], signs[k]
    if return_argmax:
        b = np.where(best_a @ M >= 0, 1, -1)
        return float(best), best_a, b
    return float(best)


def out_bound(M, cap=EXACT_CAP, return_argmax=False):
    """Bound with Bob's reply allowed to depend on Alice's outcome.

    For fixed ``a`` the optimum is ``sum_y |sum_{a_x=+1} M_xy| + sum_y |sum_{a_x=-1} M_xy|``;
    ``a`` and ``-a`` score alike, so only ``a_0 = +1`` is enumerated.
    """
    M = as_coefficients(M)
    total = M.sum(axis=0)
    best, best_a = None, None
    for signs in _chunks(M.shape[0], cap):
        plus = ((signs + 1) // 2).astype(M.dtype) @ M
        values = np.abs(plus).sum(axis=1) + np.abs(total - plus).sum(axis=1)
        k = int(np.argmax(values))
        if best is None or values[k] > best:
            best, best_a = values[k], signs[k]
    if return_argmax:
        plus = M[best_a > 0].sum(axis=0)
        minus = M[best_a < 0].sum(axis=0)
        bplus = np.where(plus >= 0, 1, -1)
        bminus = np.where(minus >= 0, -1, 1)
        return float(best), best_a, bplus, bminus
    return float(best)


def out_bound_bruteforce(M, cap=BRUTE_CAP):
    """Direct maximisation of ``sum M_xy a_x b_{y, a_x}`` over all ``a`` and both Bob maps."""
    M = as_coefficients(M)
    m, n = M.shape
    if m + 2 * n > cap:
        raise CapExceededError(f"m + 2n = {m + 2 * n} exceeds the brute-force cap {cap}")
    a_all = sign_vectors(m, fix_first=False)  # (2^m, m)
    b_all = sign_vectors(2 * n, fix_first=False).reshape(-1, 2, n)  # [k, 0] = b_{.,+1}, [k, 1] = b_{.,-1}
    # resp[k, x, o] = sum_y M_xy b_{y, o} for Bob map k and announced outcome o
    resp = np.einsum("xy,koy->kxo", M, b_all.astype(M.dtype))
    best = None
    for start in range(0, len(a_all), max(1, CHUNK // len(b_all))):
        a = a_all[start:start + max(1, CHUNK // len(b_all))]
        outcome = (1 - a) // 2  # +1 -> 0, -1 -> 1
        picked = np.take_along_axis(resp[None, :, :, :],
                                    np.broadcast_to(outcome[:, None, :, None],
                                                    (len(a), len(b_all), m, 1)), axis=3)[..., 0]
        values = (picked * a[:, None, :]).sum(axis=2)
        v = values.max()
        best = v if best is None else max(best, v)
    return float(best)


def symmetrize(M):
    """Stack ``M`` above ``-M``."""
    M = np.asarray(M)
    return np.vstack([M, -M])


def local_bound_heuristic(M, restarts=64, seed=0):
    """Lower bound on ``local_bound`` by single-flip ascent from random starts.

    Not exact: the returned value is only guaranteed to be attained.
    """
    M = np.asarray(M, dtype=float)
    rng = np.random.default_rng(seed)
    best, best_a = -np.inf, None
    for _ in range(restarts):
        a = rng.choice([-1.0, 1.0], size=M.shape[0])
        cols = a @ M
        while True:
            # flipping a_x changes the column sums by -2 a_x M_x
            trial = np.abs(cols[None, :] - 2 * a[:, None] * M).sum(axis=1)
            x = int(np.argmax(trial))
            if trial[x] <= np.abs(cols).sum() + 1e-12:
                break
            cols -= 2 * a[x] * M[x]
            a[x] = -a[x]
        value = np.abs(cols).sum()
        if value > best:
            best, best_a = value, a.copy()
    return float(best), best_a.astype(np.int64)


def quantum_value(M, st, A, B):
    """``sum M_xy u_x . T . u_y`` for Bloch-vector observables."""
    M = np.asarray(M, dtype=float)
    if M.shape != (len(A), len(B)):
        raise LhvOutError(f"coefficients {M.shape} do not match {len(A)} x {len(B)} measurements")
    return float(np.sum(M * (A.vectors @ st.T @ B.vectors.T)))


@dataclass
class WitnessReport:
    lhs: float
    bound: float
    violated: bool


def theorem2_witness(M, st, A, B):
    """Evaluate ``symmetrize(M)`` on Alice's observables extended by their negations.

    The left-hand side equals twice ``quantum_value(M, ...)`` and the bound,
    which holds for both local and outcome-communication models, equals twice
    ``local_bound(M)``.
    """
    from .quantum import MeasurementSet

    extended = MeasurementSet(np.vstack([A.vectors, -A.vectors]))
    Ms = symmetrize(M)
    lhs = quantum_value(Ms, st, extended, B)
    bound = out_bound(Ms)
    return WitnessReport(lhs, bound, bool(lhs > bound))


def read_bellm(source):
    lines = _text.content_lines(source)
    _text.expect_magic(lines, "BELLM 1")
    if len(lines) < 2:
        raise LhvOutError("BELLM file missing size line")
    h = _text.parse_header(lines[1], ("m", "n"))
    try:
        rows = [[float(t) for t in line.split()] for line in lines[2:]]
    except ValueError as exc:
        raise LhvOutError(f"bad coefficient: {exc}") from exc
    M = np.array(rows)
    if M.shape != (h["m"], h["n"]):
        raise LhvOutError(f"expected {h['m']}x{h['n']} coefficients, got shape {M.shape}")
    return as_coefficients(M)


def write_bellm(M, path):
    M = np.asarray(M)
    lines = ["BELLM 1", f"m {M.shape[0]} n {M.shape[1]}"]
    lines += [" ".join(_text.fmt(v) for v in row) for row in M]
    _text.write_text(path, lines)
