"""Numerical tracing of the circle of irreducible SU(2) representation classes.

Conjugation freedom is killed by a gauge: the first generator maps to a
rotation about e3 by theta in (0, pi); the second to a rotation whose axis
lies in the e1-e3 half-plane with positive e1 component (angles psi, phi);
any further generator gets a full axis-angle triple.  A point on the curve
is a zero of the relator residual (quaternion of each evaluated relator
minus 1), a rank-2 system along a regular curve.

Continuation is predictor-corrector: the predictor direction is the null
vector of the analytic residual Jacobian (quaternion product rule), the
corrector is a Newton solve of the residual augmented with the hyperplane
condition through the predicted point.  Tangent 1-cocycles come from the
kernel of the coboundary pair (cocycle condition via evaluated Fox rows,
orthogonality to coboundaries), normalized to Killing norm one, oriented
along the trace direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (Bifurcation, NoConvergence, NotRegular, PathLost,
                     ReducibleLimit)
from .su2 import SU2, is_irreducible, killing
from .words import GroupPresentation, Word, fox_derivative

RESIDUAL_TOL = 1e-10
RANK_RTOL = 1e-8
NEAR_FACTOR = 10.0


# ---- gauge parametrization -------------------------------------------------------


def param_count(m: int) -> int:
    """Gauge parameters for m generators: 1 + 2 + 3 + ... pattern."""
    if m < 2:
        raise ValueError("need at least two generators for an irreducible gauge")
    return 1 + 2 + 3 * (m - 2)


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def _qconj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_images(generators, params):
    """Per-generator quaternions and their derivatives w.r.t. each parameter.

    Returns (quats, dquats) where dquats[g] is an (nparams, 4) array, zero
    except in that generator's own parameter rows.
    """
    m = len(generators)
    n = param_count(m)
    params = np.asarray(params, dtype=float)
    if params.shape != (n,):
        raise ValueError(f"expected {n} gauge parameters, got {params.shape}")
    quats, dquats = {}, {}
    th = params[0]
    g0 = generators[0]
    quats[g0] = np.array([np.cos(th), 0.0, 0.0, np.sin(th)])
    d = np.zeros((n, 4))
    d[0] = [-np.sin(th), 0.0, 0.0, np.cos(th)]
    dquats[g0] = d

    ps, ph = params[1], params[2]
    g1 = generators[1]
    axis = np.array([np.sin(ph), 0.0, np.cos(ph)])
    daxis = np.array([np.cos(ph), 0.0, -np.sin(ph)])
    quats[g1] = np.concatenate([[np.cos(ps)], np.sin(ps) * axis])
    d = np.zeros((n, 4))
    d[1] = np.concatenate([[-np.sin(ps)], np.cos(ps) * axis])
    d[2] = np.concatenate([[0.0], np.sin(ps) * daxis])
    dquats[g1] = d

    off = 3
    for g in generators[2:]:
        ps, ph, ch = params[off], params[off + 1], params[off + 2]
        axis = np.array([np.sin(ph) * np.cos(ch), np.sin(ph) * np.sin(ch), np.cos(ph)])
        dph = np.array([np.cos(ph) * np.cos(ch), np.cos(ph) * np.sin(ch), -np.sin(ph)])
        dch = np.array([-np.sin(ph) * np.sin(ch), np.sin(ph) * np.cos(ch), 0.0])
        quats[g] = np.concatenate([[np.cos(ps)], np.sin(ps) * axis])
        d = np.zeros((n, 4))
        d[off] = np.concatenate([[-np.sin(ps)], np.cos(ps) * axis])
        d[off + 1] = np.concatenate([[0.0], np.sin(ps) * dph])
        d[off + 2] = np.concatenate([[0.0], np.sin(ps) * dch])
        dquats[g] = d
        off += 3
    return quats, dquats


def images_from_params(generators, params) -> dict:
    quats, _ = quat_images(generators, params)
    return {g: SU2(q) for g, q in quats.items()}


def _word_quat_and_jac(word: Word, quats, dquats, n):
    """Quaternion of the evaluated word and its (n, 4) parameter Jacobian."""
    val = np.array([1.0, 0.0, 0.0, 0.0])
    jac = np.zeros((n, 4))
    for g, s in word.letters:
        q = quats[g] if s > 0 else _qconj(quats[g])
        dq = dquats[g] if s > 0 else np.column_stack([
            dquats[g][:, 0], -dquats[g][:, 1], -dquats[g][:, 2], -dquats[g][:, 3]])
        new_jac = np.empty_like(jac)
        for k in range(n):
            new_jac[k] = _qmul(jac[k], q) + _qmul(val, dq[k])
        jac = new_jac
        val = _qmul(val, q)
    return val, jac


def residual_and_jacobian(pres: GroupPresentation, params):
    """Stacked relator residuals (quaternion minus identity) and Jacobian."""
    n = param_count(len(pres.generators))
    quats, dquats = quat_images(pres.generators, params)
    res = np.empty(4 * len(pres.relators))
    jac = np.empty((4 * len(pres.relators), n))
    target = np.array([1.0, 0.0, 0.0, 0.0])
    for i, r in enumerate(pres.relators):
        val, j = _word_quat_and_jac(r, quats, dquats, n)
        res[4 * i:4 * i + 4] = val - target
        jac[4 * i:4 * i + 4] = j.T
    return res, jac


def residual_norm(pres: GroupPresentation, params) -> float:
    res, _ = residual_and_jacobian(pres, params)
    return float(np.linalg.norm(res))


# ---- representation points -------------------------------------------------------


@dataclass
class RepPoint:
    """A gauge-fixed point of the representation curve with derived data."""

    params: np.ndarray
    images: dict
    residual: float
    fingerprint: np.ndarray
    tangent: dict | None = None        # generator -> su2 vector (harmonic, unit)
    h_dims: tuple | None = None
    mu_noncentral: bool = True
    flags: tuple = ()
    s: float | None = None

    def with_s(self, s: float) -> "RepPoint":
        return replace(self, s=s)


def fingerprint(images: dict, generators) -> np.ndarray:
    """Traces of the increasing-index subproducts of the generator system."""
    m = len(generators)
    out = []
    for mask in range(1, 2 ** m):
        prod = SU2.identity()
        for i in range(m):
            if mask >> i & 1:
                prod = prod * images[generators[i]]
        out.append(prod.trace())
    return np.array(out)


def evaluate_image(images: dict, word: Word) -> SU2:
    out = SU2.identity()
    for g, s in word.letters:
        out = out * (images[g] if s > 0 else images[g].inverse())
    return out


# ---- twisted cochain data on the presentation ------------------------------------


def h1_matrices(pres: GroupPresentation, images: dict):
    """Coboundaries (delta0, delta1) of the Ad-twisted presentation cochain.

    delta0 sends xi to the coboundary gamma -> xi - Ad rho(gamma) xi on
    generators; delta1 evaluates the Fox rows of the relators.
    """
    gens = pres.generators
    m = len(gens)
    adj = {g: u.adjoint() for g, u in images.items()}
    d0 = np.zeros((3 * m, 3))
    for j, g in enumerate(gens):
        d0[3 * j:3 * j + 3] = np.eye(3) - adj[g]
    d1 = np.zeros((3 * len(pres.relators), 3 * m))
    for i, r in enumerate(pres.relators):
        for j, g in enumerate(gens):
            e = fox_derivative(r, g)
            blk = np.zeros((3, 3))
            for w, c in e.terms.items():
                mat = np.eye(3)
                for gg, s in w.letters:
                    mat = mat @ (adj[gg] if s > 0 else adj[gg].T)
                blk += c * mat
            d1[3 * i:3 * i + 3, 3 * j:3 * j + 3] = blk
    return d0, d1


def regularity(pres: GroupPresentation, images: dict):
    """Cohomology dimensions (dim H^0, dim H^1, dim H^2) of the Ad twist."""
    d0, d1 = h1_matrices(pres, images)
    m, k = len(pres.generators), len(pres.relators)

    def rank_of(mat):
        s = np.linalg.svd(mat, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0, np.inf
        r = int(np.sum(s > RANK_RTOL * s[0]))
        margin = s[r - 1] / s[0] if r > 0 else np.inf
        return r, margin

    r0, _ = rank_of(d0)
    r1, _ = rank_of(d1)
    return 3 - r0, 3 * m - r0 - r1, 3 * k - r1


def tangent_from_kernel(pres: GroupPresentation, images: dict):
    """Harmonic unit tangent cocycle: ker delta1 orthogonal to im delta0.

    Returns (vector of length 3m, gap) where gap is the ratio of the two
    smallest singular values (regularity margin).  Sign is arbitrary.
    """
    d0, d1 = h1_matrices(pres, images)
    stack = np.vstack([d1, d0.T])
    _, svals, vt = np.linalg.svd(stack)
    if svals[0] == 0:
        raise NotRegular("coboundary stack vanished")
    small = svals[-1] / svals[0]
    second = svals[-2] / svals[0]
    if small > RANK_RTOL:
        raise NotRegular(f"no tangent direction: smallest relative sv {small:.2e}")
    if second <= RANK_RTOL:
        raise NotRegular("tangent space has dimension > 1")
    v = vt[-1].real
    v = v / np.linalg.norm(v)
    return v, second / max(small, 1e-300)


def cocycle_from_velocity(pres: GroupPresentation, params, velocity) -> dict:
    """Raw tangent cocycle of a gauge-parameter velocity: u(g) = drho(g) rho(g)^-1."""
    n = param_count(len(pres.generators))
    quats, dquats = quat_images(pres.generators, params)
    velocity = np.asarray(velocity, dtype=float)
    out = {}
    for g in pres.generators:
        dq = dquats[g].T @ velocity          # d/dt of the quaternion
        u = _qmul(dq, _qconj(quats[g]))
        out[g] = u[1:].copy()                # pure part; scalar part is O(residual)
    return out


def cocycle_eval(u: dict, word: Word, images: dict) -> np.ndarray:
    """Extend a generator cocycle to a word by u(ab) = u(a) + Ad rho(a) u(b)."""
    val = np.zeros(3)
    prefix = SU2.identity()
    for g, s in word.letters:
        if s > 0:
            val = val + prefix.adjoint() @ u[g]
            prefix = prefix * images[g]
        else:
            ginv = images[g].inverse()
            val = val - (prefix * ginv).adjoint() @ u[g]
            prefix = prefix * ginv
    return val


def coboundary(xi, images: dict, generators) -> dict:
    return {g: np.asarray(xi) - images[g].adjoint() @ np.asarray(xi)
            for g in generators}


def _vec_to_cocycle(v: np.ndarray, generators) -> dict:
    return {g: v[3 * j:3 * j + 3].copy() for j, g in enumerate(generators)}


def _cocycle_to_vec(u: dict, generators) -> np.ndarray:
    return np.concatenate([u[g] for g in generators])


def tangent_cocycle(pres: GroupPresentation, point: "RepPoint",
                    orient: dict | None = None) -> dict:
    """Unit harmonic tangent cocycle at a point, oriented along ``orient``."""
    v, _ = tangent_from_kernel(pres, point.images)
    if orient is not None:
        ref = _cocycle_to_vec(orient, pres.generators)
        if float(ref @ v) < 0:
            v = -v
    else:
        k = int(np.argmax(np.abs(v)))
        if v[k] < 0:
            v = -v
    return _vec_to_cocycle(v, pres.generators)


# ---- solving and continuation ----------------------------------------------------


def _point_from_params(pres: GroupPresentation, params,
                       want_tangent: bool = True,
                       orient: dict | None = None) -> RepPoint:
    images = images_from_params(pres.generators, params)
    res, _ = residual_and_jacobian(pres, params)
    rnorm = float(np.linalg.norm(res))
    fp = fingerprint(images, pres.generators)
    h = regularity(pres, images)
    mu_word = pres.mu if pres.mu is not None else Word.gen(pres.generators[0])
    mu_img = evaluate_image(images, mu_word)
    mu_ok = abs(mu_img.trace()) < 2.0 - 1e-9
    flags = []
    if h != (0, 1, 1):
        flags.append("irregular")
    rep = is_irreducible(list(images.values()))
    if rep.near_reducible:
        flags.append("near_reducible")
    tangent = None
    if want_tangent and h[1] == 1:
        tangent = tangent_cocycle(pres, RepPoint(
            params=np.asarray(params, float), images=images, residual=rnorm,
            fingerprint=fp), orient=orient)
    return RepPoint(params=np.asarray(params, dtype=float), images=images,
                    residual=rnorm, fingerprint=fp, tangent=tangent,
                    h_dims=h, mu_noncentral=mu_ok, flags=tuple(flags))


def solve_near(pres: GroupPresentation, seed, tol: float = RESIDUAL_TOL,
               max_iter: int = 50) -> RepPoint:
    """Newton least-squares solve of the relator equations from a gauge seed."""
    params = np.asarray(seed, dtype=float).copy()
    n = param_count(len(pres.generators))
    if params.shape != (n,):
        raise ValueError(f"seed must have {n} gauge parameters")
    for _ in range(max_iter):
        res, jac = residual_and_jacobian(pres, params)
        if np.linalg.norm(res) <= tol:
            break
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        if not np.all(np.isfinite(step)):
            raise NoConvergence("Newton step is not finite")
        params = params + step
    else:
        raise NoConvergence(
            f"no convergence after {max_iter} iterations "
            f"(residual {np.linalg.norm(res):.2e})")
    images = images_from_params(pres.generators, params)
    rep = is_irreducible(list(images.values()))
    if not rep.irreducible:
        raise ReducibleLimit("converged to a reducible representation")
    return _point_from_params(pres, params)


def predictor_direction(pres: GroupPresentation, params, prev=None) -> np.ndarray:
    """Unit null vector of the residual Jacobian, oriented along prev."""
    _, jac = residual_and_jacobian(pres, params)
    _, svals, vt = np.linalg.svd(jac)
    # a regular curve point leaves exactly one relative null direction
    rel = svals / svals[0]
    null_dims = int(np.sum(rel <= RANK_RTOL)) + (vt.shape[0] - svals.size)
    if null_dims == 0:
        raise NotRegular("no null direction: curve equations have full rank")
    if null_dims > 1:
        raise Bifurcation(
            f"rank drop: {null_dims} null directions at params {params}")
    v = vt[-1]
    if prev is not None and float(prev @ v) < 0:
        v = -v
    elif prev is None and v[0] < 0:
        v = -v
    return v / np.linalg.norm(v)


def _corrector(pres: GroupPresentation, pred, direction, tol, max_iter=12):
    params = np.asarray(pred, dtype=float).copy()
    for _ in range(max_iter):
        res, jac = residual_and_jacobian(pres, params)
        aug = np.concatenate([res, [float(direction @ (params - pred))]])
        if np.linalg.norm(aug) <= tol:
            return params
        jac_aug = np.vstack([jac, direction[None, :]])
        step, *_ = np.linalg.lstsq(jac_aug, -aug, rcond=None)
        params = params + step
    res, _ = residual_and_jacobian(pres, params)
    if np.linalg.norm(res) <= tol:
        return params
    return None


@dataclass
class TracedCircle:
    """Ordered continuation samples, with closure diagnostics."""

    points: list
    closed: bool
    closure_gap: float
    step: float
    flagged: tuple = ()

    def __len__(self):
        return len(self.points)


def continue_circle(pres: GroupPresentation, start: RepPoint, step: float = 0.01,
                    max_steps: int = 100000, tol: float = RESIDUAL_TOL) -> TracedCircle:
    """Trace the component of the representation curve through ``start``.

    Steps are taken in gauge-parameter arc length with halving on corrector
    failure (floor 1e-5) and on fingerprint jumps beyond 2 * step.  The trace
    stops when it re-enters a step-sized ball around the start after leaving
    it; a final corrector lands back on the start point, and the fingerprint
    gap between first and last points is reported.
    """
    if start.residual > 1e-8:
        raise PathLost("start point does not satisfy the relator equations")
    points = [start]
    flagged = []
    params = start.params.copy()
    direction = predictor_direction(pres, params)
    start_dir = direction.copy()
    left_ball = False
    h = step
    for _ in range(max_steps):
        pred = params + h * direction
        nxt = _corrector(pres, pred, direction, tol)
        if nxt is not None:
            gap = float(np.linalg.norm(
                fingerprint(images_from_params(pres.generators, nxt),
                            pres.generators) - points[-1].fingerprint))
            if gap > 2.0 * step:
                nxt = None
        if nxt is None:
            h *= 0.5
            if h < 1e-5:
                raise PathLost(f"corrector kept failing near params {params}")
            continue
        dist_start = float(np.linalg.norm(nxt - start.params))
        if left_ball and dist_start < step:
            final = _corrector(pres, start.params, start_dir, tol)
            if final is None:
                raise PathLost("could not close the loop onto the start point")
            closing = _point_from_params(pres, final,
                                         orient=points[-1].tangent)
            gap = float(np.linalg.norm(closing.fingerprint - start.fingerprint))
            for p in points:
                if p.flags:
                    flagged.append(p)
            return TracedCircle(points=points, closed=True, closure_gap=gap,
                                step=step, flagged=tuple(flagged))
        if dist_start > 2.0 * step:
            left_ball = True
        point = _point_from_params(pres, nxt, orient=points[-1].tangent)
        points.append(point)
        params = nxt
        direction = predictor_direction(pres, params, prev=direction)
        h = min(step, 2.0 * h)
    raise PathLost(f"no closure after {max_steps} steps")


def grid_scan(pres: GroupPresentation, n: int = 24):
    """Coarse residual scan over the gauge box; returns best seeds first.

    For two-generator presentations scans (theta, psi, phi) on an n^3 grid
    away from the reducible walls.
    """
    m = len(pres.generators)
    npar = param_count(m)
    if npar != 3:
        raise ValueError("grid_scan supports two-generator presentations only")
    ticks = np.linspace(0.12, np.pi - 0.12, n)
    best = []
    for th in ticks:
        for ps in ticks:
            for ph in ticks:
                p = np.array([th, ps, ph])
                r = residual_norm(pres, p)
                best.append((r, p))
    best.sort(key=lambda t: t[0])
    return [p for _, p in best[:50]]


def find_irreducible_point(pres: GroupPresentation, seeds=None) -> RepPoint:
    """First irreducible regular curve point found from the given seeds."""
    if seeds is None:
        seeds = grid_scan(pres)
    last_err = None
    for seed in seeds:
        try:
            pt = solve_near(pres, seed)
        except (NoConvergence, ReducibleLimit, NotRegular) as exc:
            last_err = exc
            continue
        if pt.h_dims == (0, 1, 1) and pt.mu_noncentral:
            return pt
        last_err = NotRegular(f"found point with h_dims {pt.h_dims}")
    raise NoConvergence(f"no irreducible point found: {last_err}")
