"""Inscribed (hemi)sphere radii of measurement hulls and the final visibility.

A model valid for a finite set of Bloch vectors stays valid for every
projective measurement once the visibility is multiplied by the radius of a
ball (or upper half-ball) inside the convex hull of that set.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import LhvOutError
from .fw import nu_scaling
from .quantum import double_set

PLANE_TOL = 1e-9
NONLOCALITY_THRESHOLD = 0.69604  # W(v) violates a Bell inequality above this visibility


@dataclass(frozen=True)
class HullFacet:
    """Supporting plane ``normal . x = offset`` with a unit outward normal."""

    normal: tuple
    offset: float


@dataclass(frozen=True)
class VisibilityCertificate:
    v_model: float
    epsilon: float
    nu: float
    eta_A: float
    eta_B: float
    v_final: float

    def lines(self):
        return [f"V_MODEL {self.v_model!r}", f"EPSILON {self.epsilon!r}", f"NU {self.nu!r}",
                f"ETA_A {self.eta_A!r}", f"ETA_B {self.eta_B!r}", f"V_FINAL {self.v_final!r}"]


def _points(points):
    return np.asarray(getattr(points, "vectors", points), dtype=float).reshape(-1, 3)


def _with_origin(pts, include_origin):
    if include_origin:
        pts = np.vstack([pts, np.zeros(3)])
    return pts


def _check_full_dimensional(pts):
    if len(pts) < 4 or np.linalg.matrix_rank(pts[1:] - pts[0], tol=1e-9) < 3:
        raise LhvOutError("point set is degenerate (its hull is not 3-dimensional)")


def _merge(normals, offsets):
    """Drop coplanar duplicates; returns facets sorted by normal then offset."""
    facets = []
    for n, d in sorted(zip(map(tuple, normals), offsets)):
        if facets:
            pn, pd = facets[-1]
            if np.abs(np.subtract(n, pn)).max() <= PLANE_TOL and abs(d - pd) <= PLANE_TOL:
                continue
        facets.append((n, d))
    # sorting by tuples can separate near-equal normals; finish with a full pass
    unique = []
    for n, d in facets:
        if not any(np.abs(np.subtract(n, u.normal)).max() <= PLANE_TOL and abs(d - u.offset) <= PLANE_TOL
                   for u in unique):
            unique.append(HullFacet(tuple(float(c) for c in n), float(d)))
    return unique


def _facets_qhull(pts):
    hull = ConvexHull(pts)
    normals = hull.equations[:, :3]
    offsets = -hull.equations[:, 3]
    scale = np.linalg.norm(normals, axis=1)
    return _merge(normals / scale[:, None], offsets / scale)


def _facets_brute(pts):
    """Every plane through three points that leaves all points on one side."""
    n_pts = len(pts)
    normals, offsets = [], []
    for i in range(n_pts - 2):
        for j in range(i + 1, n_pts - 1):
            k = np.arange(j + 1, n_pts)
            nrm = np.cross(pts[j] - pts[i], pts[k] - pts[i])
            length = np.linalg.norm(nrm, axis=1)
            ok = length > 1e-12
            nrm = nrm[ok] / length[ok, None]
            d = nrm @ pts[i]
            side = pts @ nrm.T - d  # (points, candidates)
            below = np.all(side <= PLANE_TOL, axis=0)
            above = np.all(side >= -PLANE_TOL, axis=0)
            normals.extend(nrm[below])
            offsets.extend(d[below])
            normals.extend(-nrm[above & ~below])
            offsets.extend(-d[above & ~below])
    return _merge(np.array(normals).reshape(-1, 3), np.array(offsets))


def hull_facets(points, include_origin=False, method="qhull"):
    """Facets of the 3-D convex hull, coplanar triangles merged.

    ``method="brute"`` validates every point triple against all points
    (cubic cost, for small sets and cross-checks).
    """
    pts = _with_origin(_points(points), include_origin)
    _check_full_dimensional(pts)
    if method == "qhull":
        return _facets_qhull(pts)
    if method == "brute":
        return _facets_brute(pts)
    raise LhvOutError(f"unknown hull method {method!r}")


def sphere_radius(points, method="qhull"):
    """Radius of the largest origin-centred ball inside the hull."""
    facets = hull_facets(points, method=method)
    r = min(f.offset for f in facets)
    if r <= PLANE_TOL:
        raise LhvOutError("origin is not strictly inside the hull")
    return r


def _hemisphere_reach(normal):
    """``max n . u`` over unit vectors with ``u_z >= 0``."""
    nz = normal[2]
    return 1.0 if nz >= 0 else float(np.sqrt(max(0.0, 1.0 - nz * nz)))


def hemisphere_radius(points, method="qhull"):
    """Radius of the largest upper half-ball inside ``hull(points + origin)``."""
    pts = _points(points)
    if pts[:, 2].min() < -PLANE_TOL:
        raise LhvOutError("hemisphere sets need every vector with z >= 0")
    facets = hull_facets(pts, include_origin=True, method=method)
    ratios = [f.offset / _hemisphere_reach(f.normal) for f in facets
              if f.offset > PLANE_TOL and _hemisphere_reach(f.normal) > 0]
    if not ratios:
        raise LhvOutError("hull has no facet bounding the hemisphere")
    return min(ratios)


def final_visibility(v_model, epsilon, eta_A, eta_B):
    for name, value in (("v_model", v_model), ("epsilon", epsilon), ("eta_A", eta_A), ("eta_B", eta_B)):
        if not value >= 0:
            raise LhvOutError(f"{name} must be nonnegative, got {value}")
    for name, value in (("v_model", v_model), ("eta_A", eta_A), ("eta_B", eta_B)):
        if value > 1:
            raise LhvOutError(f"{name} must not exceed 1, got {value}")
    nu = nu_scaling(epsilon)
    return VisibilityCertificate(v_model, epsilon, nu, eta_A, eta_B, nu * eta_A * eta_B * v_model)


def shrinking_factors(alice, bob, alice_region="hemisphere", double_alice=False, double_bob=True,
                      communicating=True):
    """``(eta_A, eta_B)`` for Alice's and Bob's measurement sets.

    Adjoining antipodes is sound for Bob, and for Alice only when she does
    not announce her outcome.
    """
    if double_alice and communicating:
        raise LhvOutError("Alice's set cannot be doubled when she communicates her outcome")
    if double_alice:
        alice = double_set(alice)
    if alice_region == "hemisphere":
        eta_a = hemisphere_radius(alice)
    elif alice_region == "sphere":
        eta_a = sphere_radius(alice)
    else:
        raise LhvOutError(f"unknown region {alice_region!r}")
    eta_b = sphere_radius(double_set(bob) if double_bob else bob)
    return eta_a, eta_b


def in_hull(points, x, include_origin=False, shortlist=32):
    """LP test for ``x`` in the convex hull of ``points``.

    The LP is first tried on the ``shortlist`` points best aligned with ``x``
    (a subset hull lies inside the full hull), then on all points.
    """
    pts = _with_origin(_points(points), include_origin)
    x = np.asarray(x, dtype=float)

    def feasible(sub):
        a_eq = np.vstack([sub.T, np.ones(len(sub))])
        res = linprog(np.zeros(len(sub)), A_eq=a_eq, b_eq=np.append(x, 1.0),
                      bounds=(0, None), method="highs")
        return res.status == 0

    if len(pts) > shortlist:
        order = np.argsort(-(pts @ x))[:shortlist]
        sub = pts[order]
        if include_origin:
            sub = np.vstack([sub, np.zeros(3)])
        if feasible(sub):
            return True
    return feasible(pts)


def random_directions(n, seed=0, upper=False):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    if upper:
        u[:, 2] = np.abs(u[:, 2])
    return u


def _batch_in_hull(sub_points, targets):
    """One block-diagonal LP asking every target to lie in its own point hull."""
    blocks = [sp.vstack([sp.csr_matrix(P.T), sp.csr_matrix(np.ones((1, len(P))))]) for P in sub_points]
    a_eq = sp.block_diag(blocks, format="csr")
    b_eq = np.concatenate([np.append(t, 1.0) for t in targets])
    res = linprog(np.zeros(a_eq.shape[1]), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0


def spot_check_radius(points, radius, n_dirs=10_000, seed=0, upper=False, include_origin=False,
                      shrink=1e-9, shortlist=32, batch=500):
    """Number of random directions ``u`` for which ``radius * u`` fails the LP hull test.

    Directions are tested in batches through one block-diagonal LP each,
    with each target restricted to the ``shortlist`` best-aligned points;
    a failing batch is re-tested direction by direction on the full set.
    """
    pts = _with_origin(_points(points), include_origin)
    dirs = random_directions(n_dirs, seed, upper)
    r = radius * (1 - shrink)
    failures = 0
    for start in range(0, n_dirs, batch):
        chunk = r * dirs[start:start + batch]
        k = min(shortlist, len(pts))
        subs = [pts[np.argsort(-(pts @ x))[:k]] for x in chunk]
        if include_origin:
            subs = [np.vstack([s, np.zeros(3)]) for s in subs]
        if _batch_in_hull(subs, chunk):
            continue
        failures += sum(not in_hull(pts, x) for x in chunk)
    return failures
