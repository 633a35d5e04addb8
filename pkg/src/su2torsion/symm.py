"""Symmetries of the representation circle and of the torsion function.

Three kinds of symmetry act on the circle of irreducible SU(2) classes:

* the central-character involution ``iota``, which twists a representation
  by gamma -> (-1)^(alpha-exponent) and whose fixed points are the
  metabelian classes;
* peripheral outer automorphisms, supplied as generator-image words with a
  certified sign record (the longitude exponent delta, the abelianized
  meridian exponent, and an optional conjugator word);
* translation along the circle itself, which underlies the "equal up to a
  shift of arc length" relations satisfied by the torsion function T(s, t).

The checks here are numerical: automorphism and certificate claims are
certified on sampled representations, the sign delta_d = delta * delta' is
read off from meridian axes, and the functional equations are tested by a
dense translation search plus golden-section refinement on periodic
coefficient splines.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import (CentralMuImage, ComponentMismatch, InconsistentSign,
                     NotRegular, Su2TorsionError)
from .su2 import SU2
from .words import Word, parse_word, substitute, format_word
from .repspace import (RepPoint, cocycle_eval, evaluate_image, fingerprint,
                       images_from_params, param_count, solve_near, _corrector)
from .volform import MetrizedCircle, tau_eval
from .torsion import normalized_torsion

AXIS_ALIGN_TOL = 1e-6
FIXED_POINT_TOL = 1e-6


# ---- outer automorphisms ------------------------------------------------------


@dataclass(frozen=True)
class PeripheralCertificate:
    """Certified peripheral data of an automorphism.

    ``delta`` is the longitude exponent (phi(lambda) conjugate to
    lambda^delta), ``mu_exponent`` the exponent of the abelianized meridian
    image, and ``conjugator`` an optional word w with
    rho(phi(lambda)) = rho(w lambda^delta w^-1) on representations.
    """

    delta: int
    mu_exponent: int
    conjugator: Word | None = None


@dataclass(frozen=True)
class OuterAutomorphism:
    name: str
    images: dict                     # generator -> Word
    certificate: PeripheralCertificate

    def word_image(self, w: Word) -> Word:
        return substitute(w, self.images)

    def rep_images(self, images: dict) -> dict:
        """Generator images of the pullback rho o phi."""
        return {g: evaluate_image(images, w) for g, w in self.images.items()}

    def compose(self, other: "OuterAutomorphism") -> "OuterAutomorphism":
        """self o other (apply other first)."""
        imgs = {g: substitute(w, self.images) for g, w in other.images.items()}
        cert = PeripheralCertificate(
            delta=self.certificate.delta * other.certificate.delta,
            mu_exponent=self.certificate.mu_exponent * other.certificate.mu_exponent,
            conjugator=None)
        return OuterAutomorphism(f"{self.name}*{other.name}", imgs, cert)

    @classmethod
    def identity(cls, generators) -> "OuterAutomorphism":
        imgs = {g: Word(((g, 1),)) for g in generators}
        return cls("id", imgs, PeripheralCertificate(delta=1, mu_exponent=1))


# The two generators of Out(pi_1) for the bundled figure-eight model: the
# amphicheiral map phi1 and the inversion phi2.  phi1(lambda) equals lambda
# on the nose (conjugator not needed) and phi2(lambda) is the free word
# lambda^-1, so both certificates carry a trivial conjugator.
FIGURE8_PHI1 = OuterAutomorphism(
    "phi1", {"x": parse_word("X"), "y": parse_word("yXY")},
    PeripheralCertificate(delta=1, mu_exponent=-1))
FIGURE8_PHI2 = OuterAutomorphism(
    "phi2", {"x": parse_word("X"), "y": parse_word("Y")},
    PeripheralCertificate(delta=-1, mu_exponent=-1))


def _random_rep_assignments(amap, rng, count, rep_points):
    """Representation-valued assignments: abelian samples plus curve points."""
    out = [p.images for p in (rep_points or [])]
    while len(out) < count:
        u = SU2.random(rng)
        imgs = {}
        for g in amap.generators:
            e = amap.exps[g]
            v = SU2.identity()
            w = u if e >= 0 else u.inverse()
            for _ in range(abs(e)):
                v = v * w
            imgs[g] = v
        out.append(imgs)
    return out


def verify_automorphism(phi: OuterAutomorphism, pres, amap, rng=None,
                        rep_points=None, count: int = 100,
                        rtol: float = 1e-9) -> None:
    """Certify an automorphism record on sampled representations.

    Checks that every relator maps to a trivial element, that the
    peripheral certificate rho(phi(lambda)) = rho(w lambda^delta w^-1)
    holds, and that the meridian image abelianizes to t^(+-1) with the
    certified exponent (the surgery constraint for knots in S^3).
    """
    if rng is None:
        rng = np.random.default_rng(20260815)
    missing = set(pres.generators) - set(phi.images)
    if missing:
        raise Su2TorsionError(f"automorphism {phi.name} misses images for {missing}")

    deg = amap.degree(phi.word_image(pres.mu))
    if abs(deg) != 1:
        raise Su2TorsionError(
            f"{phi.name}: meridian image abelianizes to t^{deg}, not a unit power")
    if deg != phi.certificate.mu_exponent:
        raise InconsistentSign(
            f"{phi.name}: certified mu exponent {phi.certificate.mu_exponent} "
            f"but alpha(phi(mu)) = t^{deg}")

    lam_img = phi.word_image(pres.lam)
    w = phi.certificate.conjugator
    delta = phi.certificate.delta
    ident = SU2.identity()
    for imgs in _random_rep_assignments(amap, rng, count, rep_points):
        for r in pres.relators:
            gap = np.linalg.norm(evaluate_image(imgs, phi.word_image(r)).q - ident.q)
            if gap > rtol:
                raise Su2TorsionError(
                    f"{phi.name}: relator image not trivial (residual {gap:.2e})")
        lhs = evaluate_image(imgs, lam_img)
        rhs = evaluate_image(imgs, pres.lam)
        if delta < 0:
            rhs = rhs.inverse()
        if w is not None:
            cw = evaluate_image(imgs, w)
            rhs = rhs.conj_by(cw)
        gap = np.linalg.norm(lhs.q - rhs.q)
        if gap > 1e-8:
            raise InconsistentSign(
                f"{phi.name}: longitude certificate fails (gap {gap:.2e})")


# ---- the involution iota ------------------------------------------------------


def iota(p: RepPoint, amap) -> RepPoint:
    """Twist a point by the central character gamma -> (-1)^alpha(gamma).

    The returned point stores the literal sign-twisted images (generators of
    odd abelianization degree negated); its gauge parameters describe a
    conjugate representative in the standard gauge.  Since Ad(-u) = Ad(u),
    the adjoint regularity data carries over verbatim, and the tangent
    cocycle is preserved (the pushforward of a deformation of rho is the
    same su(2)-valued cocycle).
    """
    imgs = {g: (-p.images[g] if amap.exps[g] % 2 else p.images[g])
            for g in amap.generators}
    params = regauge_params(amap.generators, imgs)
    return RepPoint(params=params, images=imgs, residual=p.residual,
                    fingerprint=fingerprint(imgs, amap.generators),
                    tangent=None if p.tangent is None else dict(p.tangent),
                    h_dims=p.h_dims, mu_noncentral=p.mu_noncentral,
                    flags=p.flags, s=None)


def regauge_params(generators, images: dict) -> np.ndarray:
    """Gauge parameters of a conjugate of ``images`` in the standard slice.

    The first generator is rotated onto the e3 axis and the second into the
    e1 > 0 half of the e1-e3 plane; remaining generators contribute their
    axis-angle in spherical coordinates.  Raises NotRegular when the first
    two images share an axis (an abelian pair has no gauge slice).
    """
    e3 = np.array([0.0, 0.0, 1.0])
    g0 = generators[0]
    aa0 = images[g0].axis_angle()
    cr = np.cross(aa0.axis, e3)
    s = np.linalg.norm(cr)
    if s < 1e-14:
        rot = SU2.identity() if aa0.axis @ e3 > 0 else \
            SU2.from_axis_angle(np.pi / 2, np.array([1.0, 0.0, 0.0]))
    else:
        rot = SU2.from_axis_angle(np.arctan2(s, aa0.axis @ e3) / 2.0, cr / s)
    imgs = {g: u.conj_by(rot) for g, u in images.items()}

    params = [aa0.theta]
    if len(generators) > 1:
        g1 = generators[1]
        aa1 = imgs[g1].axis_angle()
        chi = np.arctan2(aa1.axis[1], aa1.axis[0])
        spin = SU2.from_axis_angle(-chi / 2.0, e3)
        imgs = {g: u.conj_by(spin) for g, u in imgs.items()}
        ax = imgs[g1].axis_angle().axis
        if np.hypot(ax[0], ax[1]) < 1e-12:
            raise NotRegular("first two images share an axis; no gauge slice")
        params += [aa1.theta, float(np.arctan2(ax[0], ax[2]))]
    for g in generators[2:]:
        aa = imgs[g].axis_angle()
        ax = aa.axis
        params += [aa.theta, float(np.arctan2(np.hypot(ax[0], ax[1]), ax[2])),
                   float(np.arctan2(ax[1], ax[0]))]
    out = np.array(params)
    if out.shape != (param_count(len(generators)),):
        raise NotRegular("gauge parameter count mismatch")
    check = images_from_params(generators, out)
    for g in generators:
        if not check[g].close_to(imgs[g], 1e-9):
            raise NotRegular(f"re-gauge failed to reproduce the image of {g}")
    return out


# ---- automorphism action on the curve ----------------------------------------


def act(phi: OuterAutomorphism, pres, p: RepPoint) -> RepPoint:
    """Re-gauged point representing the pullback class [rho o phi]."""
    imgs = phi.rep_images(p.images)
    mu_img = evaluate_image(imgs, pres.mu)
    if abs(mu_img.trace()) >= 2.0 - 1e-9:
        raise CentralMuImage(
            f"{phi.name}: pullback sends the meridian to a central element")
    params = regauge_params(pres.generators, imgs)
    pt = solve_near(pres, params)
    if np.max(np.abs(pt.fingerprint - fingerprint(imgs, pres.generators))) > 1e-6:
        raise NotRegular(f"{phi.name}: re-gauge moved the conjugacy class")
    return pt


def delta_prime(phi: OuterAutomorphism, pres, p: RepPoint) -> int:
    """Sign comparing the axes of rho(phi(mu)) and rho(mu) at a sample."""
    ax = evaluate_image(p.images, pres.mu).axis_angle().axis
    ax_t = evaluate_image(p.images, phi.word_image(pres.mu)).axis_angle().axis
    dot = float(ax @ ax_t)
    if abs(dot) < 1.0 - AXIS_ALIGN_TOL:
        raise InconsistentSign(
            f"{phi.name}: meridian axes not parallel (dot {dot:.6f}); "
            "the pullback meridian does not commute with the meridian here")
    return 1 if dot > 0 else -1


def delta_sign(phi: OuterAutomorphism, pres, samples) -> int:
    """delta_d = delta * delta' for the component carrying ``samples``.

    delta comes from the certificate (re-verified on the first sample);
    delta' is the axis-comparison sign, required to be constant across the
    samples.
    """
    if not samples:
        raise InconsistentSign("no samples supplied for a sign determination")
    p0 = samples[0]
    lhs = evaluate_image(p0.images, phi.word_image(pres.lam))
    rhs = evaluate_image(p0.images, pres.lam)
    if phi.certificate.delta < 0:
        rhs = rhs.inverse()
    if phi.certificate.conjugator is not None:
        rhs = rhs.conj_by(evaluate_image(p0.images, phi.certificate.conjugator))
    if np.linalg.norm(lhs.q - rhs.q) > 1e-8:
        raise InconsistentSign(f"{phi.name}: longitude certificate fails on samples")

    primes = {delta_prime(phi, pres, p) for p in samples}
    if len(primes) != 1:
        raise InconsistentSign(
            f"{phi.name}: axis-comparison sign varies across the component")
    return phi.certificate.delta * primes.pop()


def pullback_ratio(model, phi: OuterAutomorphism, p: RepPoint) -> float:
    """tau(v) / tau(pullback of v) at one sample; equals delta_d on a component.

    The tangent pushforward under the identification H^1(Ad rho) ->
    H^1(Ad rho o phi) is the composed cocycle u(g) = v(phi(g)).
    """
    pres = model.presentation
    if p.tangent is None:
        raise NotRegular("sample carries no tangent cocycle")
    v = p.tangent
    t1 = tau_eval(model, p.images, v)
    imgs = phi.rep_images(p.images)
    u = {g: cocycle_eval(v, phi.images[g], p.images) for g in pres.generators}
    t2 = tau_eval(model, imgs, u)
    return t1 / t2


def iota_isometry_deviation(model, amap, samples) -> float:
    """max |tau_iota(v) + tau(v)| / |tau(v)|: zero iff iota is an
    orientation-reversing isometry pointwise (the pushforward of a tangent
    under iota is the same cocycle)."""
    worst = 0.0
    for p in samples:
        if p.tangent is None:
            continue
        t1 = tau_eval(model, p.images, p.tangent)
        t2 = tau_eval(model, iota(p, amap).images, p.tangent)
        worst = max(worst, abs(t2 + t1) / abs(t1))
    return worst


def out_relations_deviation(pres, relations, samples) -> dict:
    """Fingerprint deviation of composed automorphisms that should be inner.

    ``relations`` maps a label to a sequence of automorphisms; the entry is
    the max over samples of the fingerprint gap between the composed
    pullback and the sample itself.
    """
    out = {}
    for label, seq in relations.items():
        comp = reduce(lambda a, b: a.compose(b), seq)
        worst = 0.0
        for p in samples:
            imgs = comp.rep_images(p.images)
            gap = np.max(np.abs(fingerprint(imgs, pres.generators) - p.fingerprint))
            worst = max(worst, float(gap))
        out[label] = worst
    return out


# ---- metabelian locus ---------------------------------------------------------


@dataclass(frozen=True)
class MetabelianLocus:
    """iota-fixed samples on a metrized component.

    When the ambient manifold is not certified as an integral homology
    sphere the points are still the fixed-point set of iota, but the
    identification with the metabelian classes is only flagged, not
    asserted (``full_fixed_set`` False).
    """

    points: list
    full_fixed_set: bool


def _point_between(pres, p0: RepPoint, p1: RepPoint, frac: float):
    d = p1.params - p0.params
    direction = d / np.linalg.norm(d)
    params = _corrector(pres, p0.params + frac * d, direction, 1e-12)
    return params, images_from_params(pres.generators, params)


def metabelian_locus(model, met: MetrizedCircle) -> MetabelianLocus:
    """Fixed points of iota located by sign changes of tr rho_s(mu).

    Each bracketed zero of the meridian trace is refined by bisection along
    the curve, and kept when the fingerprint of the iota twist agrees with
    the point's own (class equality, tolerance 1e-6).
    """
    pres, amap = model.presentation, model.amap
    pts = met.samples
    n = len(pts)
    traces = np.array([evaluate_image(p.images, pres.mu).trace() for p in pts])
    period = met.total_volume

    found = []
    pairs = range(n) if met.closed else range(n - 1)
    for i in pairs:
        j = (i + 1) % n
        a, b = traces[i], traces[j]
        if a == 0.0:
            frac, params = 0.0, pts[i].params
        elif a * b < 0.0:
            lo, hi, fa = 0.0, 1.0, a
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                params, imgs = _point_between(pres, pts[i], pts[j], mid)
                fm = evaluate_image(imgs, pres.mu).trace()
                if fm == 0.0 or hi - lo < 1e-14:
                    break
                if fa * fm < 0.0:
                    hi = mid
                else:
                    lo, fa = mid, fm
            frac = 0.5 * (lo + hi)
        else:
            continue
        pt = solve_near(pres, params)
        gap_i = (pts[j].s - pts[i].s) if j != 0 else (period - pts[i].s)
        s_star = (pts[i].s + frac * gap_i) % period if met.closed else \
            pts[i].s + frac * gap_i
        twisted = iota(pt, amap)
        dist = float(np.max(np.abs(twisted.fingerprint - pt.fingerprint)))
        if dist < FIXED_POINT_TOL:
            found.append(pt.with_s(s_star))

    found.sort(key=lambda p: p.s)
    deduped = []
    for p in found:
        if not deduped or abs(p.s - deduped[-1].s) > 2.0 * met.step:
            deduped.append(p)
    return MetabelianLocus(points=deduped, full_fixed_set=model.ambient_zhs)


# ---- the torsion function T(s, t) ---------------------------------------------


@dataclass(frozen=True)
class TorsionFunction:
    """Arc-length indexed normalized torsion along one component."""

    component: str
    period: float
    closed: bool
    samples: list                    # (s, LaurentPoly), s ascending

    @property
    def s_values(self) -> np.ndarray:
        return np.array([s for s, _ in self.samples])

    @property
    def powers(self):
        lo = min(p.lo for _, p in self.samples)
        hi = max(p.hi for _, p in self.samples)
        return list(range(lo, hi + 1))

    def coefficient_table(self):
        """(s values, {power: coefficient array})."""
        powers = self.powers
        table = {k: np.array([poly.coeff(k).real for _, poly in self.samples])
                 for k in powers}
        return self.s_values, table

    def f_values(self) -> np.ndarray:
        """-1/2 times the t^0 coefficient; equals tr rho_s(mu) on knot circles."""
        return -0.5 * self.coefficient_table()[1].get(0, np.zeros(len(self.samples)))


def torsion_function(model, met: MetrizedCircle,
                     component: str = "C0") -> TorsionFunction:
    samples = [(float(p.s), normalized_torsion(model, p.images).poly)
               for p in met.samples]
    return TorsionFunction(component=component, period=float(met.total_volume),
                           closed=met.closed, samples=samples)


def _coefficient_splines(F: TorsionFunction):
    xs, table = F.coefficient_table()
    if F.closed:
        grid = np.append(xs, xs[0] + F.period)
        return {k: CubicSpline(grid, np.append(v, v[0]), bc_type="periodic")
                for k, v in table.items()}
    return {k: CubicSpline(xs, v) for k, v in table.items()}


@dataclass(frozen=True)
class SymmetryReport:
    transform: str
    s0: float
    residual: float
    passed: bool
    period: float
    matchings: list | None = None    # per t-exponent reports for thm_S (ii)


def _relation_residual(gsp, fsp, xs, s0, period, power_map, arg_map, sign_map):
    worst = 0.0
    for q, spline in gsp.items():
        lhs = spline(np.mod(xs, period))
        rhs = sign_map(q) * fsp[power_map(q)](np.mod(arg_map(xs + s0), period))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def check_symmetry(F: TorsionFunction, transform, G: TorsionFunction = None,
                   delta_d: int = None, grid: int = 2048,
                   tol: float = 1e-6) -> SymmetryReport:
    """Best translation s0 and sup-norm residual of a "~" relation.

    ``transform`` is "iota" (G(s, t) matched against -F(-s - s0, -t)),
    "identity" (G(s, t) against F(s + s0, t)), or an OuterAutomorphism
    (G(s, t) against F(delta_d (s + s0), t^e); both meridian exponents e are
    tried and reported, since a palindromic torsion cannot distinguish
    them).  G defaults to F, the circle case where the transform maps the
    component to itself.
    """
    if G is None:
        G = F
    scale = max(F.period, G.period)
    if abs(F.period - G.period) > 1e-4 * scale:
        raise ComponentMismatch(
            f"component lengths differ: {F.period} vs {G.period}")
    fsp, gsp = _coefficient_splines(F), _coefficient_splines(G)
    if set(fsp) != set(gsp) or any(-q not in fsp for q in fsp):
        raise ComponentMismatch("coefficient supports are not comparable")
    period = F.period
    xs_coarse = np.linspace(0.0, period, 256, endpoint=False)
    xs_dense = np.linspace(0.0, period, 4096, endpoint=False)

    def search(power_map, arg_map, sign_map):
        def res(s0, xs):
            return _relation_residual(gsp, fsp, xs, s0, period,
                                      power_map, arg_map, sign_map)
        shifts = np.linspace(0.0, period, grid, endpoint=False)
        vals = [res(s0, xs_coarse) for s0 in shifts]
        k = int(np.argmin(vals))
        h = period / grid
        bracket = (shifts[k] - h, shifts[k], shifts[k] + h)
        try:
            opt = minimize_scalar(lambda s0: res(s0, xs_dense),
                                  bracket=bracket, method="golden",
                                  options={"xtol": 1e-12})
            s0 = float(opt.x)
        except ValueError:
            s0 = float(shifts[k])
        s0 %= period
        return s0, res(s0, xs_dense)

    if transform == "identity":
        s0, r = search(lambda q: q, lambda s: s, lambda q: 1.0)
        return SymmetryReport("identity", s0, r, r <= tol, period)
    if transform == "iota":
        s0, r = search(lambda q: q, lambda s: -s, lambda q: -((-1.0) ** q))
        return SymmetryReport("iota", s0, r, r <= tol, period)

    phi: OuterAutomorphism = transform
    if delta_d is None:
        raise InconsistentSign(
            f"delta_d required to check the action of {phi.name}")
    matchings = []
    for e in (phi.certificate.mu_exponent, -phi.certificate.mu_exponent):
        s0, r = search(lambda q: e * q, lambda s: delta_d * s, lambda q: 1.0)
        matchings.append({"t_exponent": e, "s0": s0, "residual": r,
                          "passed": r <= tol})
    best = min(matchings, key=lambda m: m["residual"])
    return SymmetryReport(phi.name, best["s0"], best["residual"],
                          best["passed"], period, matchings=matchings)
