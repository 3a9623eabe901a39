"""Closed-form quantum correlators for projective qubit measurements.

A projective measurement is a unit Bloch vector ``u``; the two-qubit state is
described only through its correlation matrix ``T`` (maximally mixed
marginals), so ``<a_x b_y> = u_x . T . u_y``.
"""

from dataclasses import dataclass

import numpy as np

from . import _text
from .behaviour import Behaviour, CorrelatorTable, Scenario
from .errors import InvariantError, LhvOutError

UNIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float).reshape(-1, 3)
        bad = np.abs(np.linalg.norm(v, axis=1) - 1.0) > UNIT_TOL
        if bad.any():
            raise InvariantError(f"{int(bad.sum())} non-unit Bloch vectors (first at row {int(np.argmax(bad))})")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return len(self.vectors)

    @classmethod
    def normalized(cls, vectors):
        v = np.asarray(vectors, dtype=float).reshape(-1, 3)
        return cls(v / np.linalg.norm(v, axis=1, keepdims=True))


@dataclass(frozen=True, eq=False)
class CorrelatorState:
    """Two-qubit state with maximally mixed marginals, via its correlation matrix."""

    T: np.ndarray

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        if T.shape != (3, 3):
            raise InvariantError("correlation matrix must be 3x3")
        if np.linalg.svd(T, compute_uv=False).max() > 1 + UNIT_TOL:
            raise InvariantError("correlation matrix has a singular value above 1")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)


def werner_state(v):
    """``W(v) = v |psi-><psi-| + (1 - v) 1/4``, with ``T = -v 1``."""
    if not 0.0 <= v <= 1.0:
        raise LhvOutError(f"visibility must lie in [0, 1], got {v}")
    return CorrelatorState(-v * np.eye(3))


def state_behaviour(st, A, B):
    if len(A) == 0 or len(B) == 0:
        raise LhvOutError("measurement sets must be nonempty")
    corr = A.vectors @ st.T @ B.vectors.T
    return CorrelatorTable.zero_marginals(corr)


def pr_box():
    """PR box ``p(ab|xy) = 1/2 [a xor b = xy]`` in bit labels."""
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                t[x, y, a, a ^ (x * y)] = 0.5
    return Behaviour(Scenario(2, 2), t)


def pr_box_model():
    """Two equally weighted OUT strategies reproducing ``pr_box()``.

    Alice outputs ``a_x = x xor r`` for a shared bit ``r``.  Knowing ``a`` and
    ``r``, Bob recovers ``x = a xor r`` and answers ``b = a xor x y``.
    """
    from .polytope import OUT, Model

    a = np.array([[0, 1], [1, 0]])
    b = np.zeros((2, 2, 2), dtype=int)  # [r, a, y]
    for r in range(2):
        for out in range(2):
            for y in range(2):
                b[r, out, y] = out ^ ((out ^ r) * y)
    return Model(OUT, Scenario(2, 2), [0.5, 0.5], a, b)


def hemisphere_grid(K, n_per_ring=None, offsets=None):
    """Pole plus ``K`` azimuthal rings covering the closed upper hemisphere.

    Ring ``k = 1..K`` sits at polar angle ``k pi / (2K)`` (ring ``K`` is the
    equator) and carries ``n_per_ring`` points, ``4K`` by default.  ``offsets``
    shifts each ring's azimuths by a fraction of the azimuthal step; a scalar
    applies to every ring, and the default staggers consecutive rings by half
    a step.
    """
    if K < 1:
        raise LhvOutError("need at least one ring")
    counts = np.broadcast_to(np.asarray(4 * K if n_per_ring is None else n_per_ring, dtype=int), (K,))
    if offsets is None:
        offsets = [0.5 * ((K - k) % 2) for k in range(1, K + 1)]
    offsets = np.broadcast_to(np.asarray(offsets, dtype=float), (K,))
    pts = [np.array([0.0, 0.0, 1.0])]
    for k in range(1, K + 1):
        n = int(counts[k - 1])
        j = np.arange(n)
        theta = k * np.pi / (2 * K)
        phi = 2 * np.pi * (j + offsets[k - 1]) / n
        ring = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
                         np.full(n, np.cos(theta))], axis=1)
        if k == K:
            ring[:, 2] = 0.0
        pts.append(ring)
    return MeasurementSet(np.vstack(pts))


def double_set(B, tol=1e-12):
    """``B`` together with every antipode not already present."""
    v = B.vectors
    out = list(v)
    for u in -v:
        if np.abs(np.asarray(out) - u).max(axis=1).min() > tol:
            out.append(u)
    return MeasurementSet(np.array(out))


def read_measurements(source, normalize=False):
    lines = _text.content_lines(source)
    try:
        rows = np.array([[float(t) for t in line.split()] for line in lines])
    except ValueError as exc:
        raise LhvOutError(f"bad measurement row: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != 3:
        raise LhvOutError("each measurement line needs exactly three numbers")
    return MeasurementSet.normalized(rows) if normalize else MeasurementSet(rows)


def write_measurements(ms, path):
    lines = ["# Bloch vectors, one per line: x y z"]
    lines += [" ".join(_text.fmt(c) for c in u) for u in ms.vectors]
    _text.write_text(path, lines)
