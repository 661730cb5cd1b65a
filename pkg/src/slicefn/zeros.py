"""Zeros of slice functions sphere by sphere.

On a sphere ``alpha + beta*S`` a slice function reads ``vs + beta*J*ds``, so a
zero ``alpha + beta*J`` needs ``J = -vs (beta ds)^{-1}``.  Writing the point as
``alpha - vs ds^{-1}`` keeps every test rational in ``beta^2``, hence exact in
rational mode even when ``beta`` itself is irrational.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
from scipy.optimize import minimize

from .cayley_dickson import Element, SphereDecomposition, exact_sqrt, random_unit, sphere_decompose
from .errors import CaseMismatch, OutOfDomain
from .slice_rep import lift, normal_stem, slice_product
from .star_poly import SemiregularForm, StarPolynomial, _real_divmod, _real_gcd, _trim

UNIT_TOL = 1e-9
ZERO_TOL = 1e-10

EMPTY, POINT, WHOLE, HALF_SLICE = "Empty", "Point", "Whole", "HalfSlice"


@dataclass
class SphereZeroClass:
    tag: str
    sphere: SphereDecomposition
    point: Element = None
    case: int = None
    verified: bool = True
    isolation_radius: float = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {"alpha": _num(self.sphere.alpha), "beta": _num(self.sphere.beta), "tag": self.tag}
        if self.point is not None:
            out["point"] = self.point.to_json()
        if self.case is not None:
            out["case"] = self.case
        if self.isolation_radius is not None:
            out["isolation_radius"] = self.isolation_radius
        out["verified"] = bool(self.verified)
        return out


def _num(v):
    return str(v) if isinstance(v, Fraction) else float(v)


def as_sphere(obj, level=None):
    """Accept a ``SphereDecomposition``, a point, or an ``(alpha, beta)`` pair."""
    if isinstance(obj, SphereDecomposition):
        return obj
    if isinstance(obj, Element):
        return sphere_decompose(obj)
    alpha, beta = obj
    if level is None:
        raise ValueError("an (alpha, beta) pair needs the algebra level")
    exact = isinstance(alpha, (int, Fraction)) and isinstance(beta, (int, Fraction))
    return SphereDecomposition(alpha, beta, Element.unit(1, level, exact=exact), beta == 0)


def _sphere_args(sphere):
    """``(alpha, beta^2)``, exact when the sphere came from an exact point."""
    return sphere.alpha, sphere.beta_sq


def _is_zero(e, tol):
    return e.is_zero() if e.exact else e.is_zero(tol)


def _unit_test(J_times_beta, beta_sq, tol):
    """Whether ``J_times_beta / beta`` is an imaginary unit."""
    t = J_times_beta.coords[0]
    n = J_times_beta.norm()
    if J_times_beta.exact and isinstance(beta_sq, (int, Fraction)):
        return t == 0 and n == beta_sq
    beta_sq = float(beta_sq)
    return abs(float(t)) <= tol * math.sqrt(beta_sq) and abs(float(n) / beta_sq - 1.0) <= tol


def classify_from_stem(vs, ds, sphere, tol=UNIT_TOL, zero_tol=ZERO_TOL):
    """Trichotomy from the spherical value and derivative on ``sphere``."""
    alpha, beta_sq = _sphere_args(sphere)
    vs, ds = lift(vs, ds)
    if sphere.degenerate or beta_sq == 0:
        if _is_zero(vs, zero_tol):
            return SphereZeroClass(POINT, sphere, vs * 0 + alpha)
        return SphereZeroClass(EMPTY, sphere)
    if ds is None or _is_zero(ds, zero_tol / max(1.0, math.sqrt(float(beta_sq)))):
        return SphereZeroClass(WHOLE if _is_zero(vs, zero_tol) else EMPTY, sphere)
    # beta J = -vs ds^{-1}
    bJ = -(vs * ds.inverse())
    if _unit_test(bJ, beta_sq, tol):
        w = bJ + (alpha if bJ.exact else float(alpha))
        return SphereZeroClass(POINT, sphere, w)
    return SphereZeroClass(EMPTY, sphere)


def _check_domain(f, sphere):
    if not f.domain.contains(float(sphere.alpha), float(sphere.beta)):
        raise OutOfDomain("sphere lies outside the domain")


def classify_sphere_zeros(f, sphere, tol=UNIT_TOL, verify_samples=8, seed=0):
    sphere = as_sphere(sphere, f.level)
    _check_domain(f, sphere)
    vs, ds = f._stem(*_sphere_args(sphere))
    result = classify_from_stem(vs, ds, sphere, tol)
    result.verified = _verify(f, result, verify_samples, seed)
    return result


def _verify(f, result, samples, seed, tol=1e-8):
    if result.tag == POINT:
        val = f.evaluate(result.point)
        return val.is_zero() if val.exact else abs(val) <= tol * (1 + abs(result.point)) ** 4
    if result.tag == WHOLE:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = result.sphere.point(random_unit(rng, f.level))
            if abs(f.evaluate(x)) > tol * (1 + abs(x)) ** 4:
                return False
    return True


def normal_zero_on_sphere(f, sphere, tol=1e-9):
    """True iff the normal function vanishes on ``sphere`` (equivalently ``f`` has a zero there)."""
    sphere = as_sphere(sphere, f.level)
    cls = classify_sphere_zeros(f, sphere)
    vs, ds = f._stem(*_sphere_args(sphere))
    nv, nd = normal_stem(vs, ds, sphere.beta_sq)
    vanishes = _is_zero(nv, tol) and (nd is None or _is_zero(nd, tol))
    if (cls.tag != EMPTY) != vanishes:
        raise CaseMismatch(f"zero classification {cls.tag} disagrees with the normal function")
    return vanishes


# ---------------------------------------------------------------------------
# camshaft effect


def camshaft_zero(f, g, sphere, f_class=None, g_class=None, tol=UNIT_TOL):
    """Zero of ``f * g`` on ``sphere`` from the zero classes of the factors.

    The returned class records which case applied and whether it agrees with a
    direct classification of the product.
    """
    sphere = as_sphere(sphere, f.level)
    if sphere.degenerate:
        raise OutOfDomain("the camshaft formulas need a non-real sphere")
    fc = classify_sphere_zeros(f, sphere, tol)
    gc = classify_sphere_zeros(g, sphere, tol)
    for given, actual, name in ((f_class, fc, "f"), (g_class, gc, "g")):
        if given is not None and (given.tag != actual.tag or (
                given.tag == POINT and not given.point.isclose(actual.point, 1e-9))):
            raise CaseMismatch(f"supplied zero class of {name} disagrees with recomputation")
    args = _sphere_args(sphere)
    vf, df, vg, dg = lift(*f._stem(*args), *g._stem(*args))
    if not vf.exact:
        fc.point, gc.point = (None if c.point is None else c.point.to_double() for c in (fc, gc))
    if fc.tag == WHOLE or gc.tag == WHOLE:
        out = SphereZeroClass(WHOLE, sphere, case=1)
    elif fc.tag == POINT and gc.tag == EMPTY:
        out = SphereZeroClass(POINT, sphere, case_two_point(fc.point, df, vg, dg), case=2)
    elif fc.tag == EMPTY and gc.tag == POINT:
        out = SphereZeroClass(POINT, sphere, case_three_point(gc.point, vf, df, dg), case=3)
    elif fc.tag == POINT and gc.tag == POINT:
        y, z = fc.point, gc.point
        dfg = case_four_derivative(y, z, df, dg)
        if _is_zero(dfg, ZERO_TOL):
            out = SphereZeroClass(WHOLE, sphere, case=4)
        else:
            x_norm = sphere.alpha * sphere.alpha + args[1]
            if not dfg.exact:
                x_norm = float(x_norm)
            w = (df * dg * x_norm - (y * df) * (z * dg)) * dfg.inverse()
            out = SphereZeroClass(POINT, sphere, w, case=4)
            out.extra = {"case2_point": case_two_point(y, df, vg, dg),
                         "case3_point": case_three_point(z, vf, df, dg)}
    else:
        out = SphereZeroClass(EMPTY, sphere, case=0)
    direct = classify_sphere_zeros(slice_product(f, g), sphere, tol)
    out.verified = direct.tag == out.tag and (
        out.tag != POINT or out.point.isclose(direct.point, 1e-8))
    return out


def case_two_point(y, df, vg, dg):
    """Zero of ``f*g`` when ``f`` vanishes only at ``y`` and ``g`` has no zero on the sphere."""
    iy = y.im()
    num = (y * df) * vg - ((y * iy) * df) * dg
    den = df * vg - (iy * df) * dg
    return num * den.inverse()


def case_three_point(z, vf, df, dg):
    """Zero of ``f*g`` when ``g`` vanishes only at ``z`` and ``f`` has no zero on the sphere."""
    iz = z.im()
    num = vf * (z * dg) - df * ((z * iz) * dg)
    den = vf * dg - df * (iz * dg)
    return num * den.inverse()


def case_four_derivative(y, z, df, dg):
    """Spherical derivative of ``f*g`` when ``f(y) = 0 = g(z)`` on the same sphere."""
    return (y.conj() * df) * dg - df * (z * dg)


# ---------------------------------------------------------------------------
# zero scans


def _real_poly_of(f):
    if isinstance(f, StarPolynomial):
        return f.normal()
    if isinstance(f, SemiregularForm):
        return f.num.normal()
    return None


def _squarefree(coeffs):
    """Squarefree part of an exact real polynomial (lowest degree first)."""
    c = _trim(coeffs)
    if len(c) <= 2:
        return c
    deriv = [k * c[k] for k in range(1, len(c))]
    g = _real_gcd(list(c), deriv)
    if len(g) <= 1:
        return c
    q, _ = _real_divmod(c, g)
    return _trim(q)


def _divides(div, poly):
    _, r = _real_divmod(poly, div)
    return not r


def _exact_sphere(root, poly, level):
    """Snap a numerical root to an exact sphere when a rational factor confirms it."""
    a = Fraction(float(root.real)).limit_denominator(10 ** 6)
    if abs(root.imag) < 1e-9:
        if _divides([-a, Fraction(1)], poly):
            return as_sphere((a, Fraction(0)), level)
        return None
    b2 = Fraction(float(abs(root) ** 2)).limit_denominator(10 ** 6)
    if _divides([b2, -2 * a, Fraction(1)], poly):
        beta_sq = b2 - a * a
        beta = exact_sqrt(beta_sq)
        return SphereDecomposition(a, beta, Element.unit(1, level, exact=False), False, beta_sq)
    return None


def _merge(points, tol):
    out = []
    for p in sorted(points, key=lambda c: (c[0], c[1])):
        if not any(abs(p[0] - q[0]) < tol and abs(p[1] - q[1]) < tol for q in out):
            out.append(p)
    return out


def _isolation(points):
    radii = []
    for p in points:
        others = [math.hypot(p[0] - q[0], p[1] - q[1]) for q in points if q is not p]
        radii.append(min(others) if others else math.inf)
    return radii


def zero_scan(f, rect, grid_density=64, tol=UNIT_TOL):
    """Spheres inside ``rect = (a0, a1, b0, b1)`` that carry zeros of ``f``.

    Closed forms use the roots of the real normal polynomial; other functions
    scan ``|N(f)|`` on a ``grid_density`` lattice and refine local minima.
    Results come sorted by ``alpha`` then ``beta``.
    """
    a0, a1, b0, b1 = rect
    N = _real_poly_of(f)
    spheres = []
    if N is not None:
        if N.degree <= 0:
            return []
        coeffs = N.real_coeffs()
        exact = N.exact
        if exact:
            coeffs = _squarefree(coeffs)
        roots = np.roots([float(c) for c in coeffs[::-1]])
        cand = _merge([(float(r.real), abs(float(r.imag)), r) for r in roots], 1e-7)
        for a, b, r in cand:
            if not (a0 - 1e-12 <= a <= a1 + 1e-12 and b0 - 1e-12 <= b <= b1 + 1e-12):
                continue
            sph = _exact_sphere(r, coeffs, f.level) if exact else None
            if sph is None:
                sph = as_sphere((a, b), f.level)
            spheres.append(sph)
    else:
        spheres = _grid_scan(f, rect, grid_density)
        if spheres == HALF_SLICE:
            return _half_slice_report(f, rect)
    pts = [(float(s.alpha), float(s.beta)) for s in spheres]
    radii = _isolation(pts)
    out = []
    for sph, rad in zip(spheres, radii):
        try:
            cls = classify_sphere_zeros(f, sph, tol)
        except OutOfDomain:
            continue
        if cls.tag == EMPTY and N is None:
            cls = classify_sphere_zeros(f, sph, tol=1e-6)
        cls.isolation_radius = rad
        out.append(cls)
    out.sort(key=lambda c: (float(c.sphere.alpha), float(c.sphere.beta)))
    return out


def _normal_modulus_grid(f, A, B):
    AA, BB = np.meshgrid(A, B, indexing="ij")
    b2 = BB * BB
    vs, ds = f.stem_batch(AA, b2)
    ds = np.nan_to_num(ds)
    nv = np.sum(vs * vs, axis=-1) - b2 * np.sum(ds * ds, axis=-1)
    nd = 2 * np.sum(vs * ds, axis=-1)
    return np.sqrt(nv * nv + b2 * nd * nd), np.sum(vs * vs, axis=-1) + b2 * np.sum(ds * ds, axis=-1)


def _grid_scan(f, rect, n):
    a0, a1, b0, b1 = rect
    A = np.linspace(a0, a1, n)
    B = np.linspace(b0, b1, n)
    M, scale = _normal_modulus_grid(f, A, B)
    if np.all(M <= 1e-12 * (1 + scale)):
        return HALF_SLICE

    def objective(p):
        a, b = p
        if not (a0 <= a <= a1 and b0 <= b <= b1):
            return 1e6
        m, _ = _normal_modulus_grid(f, np.array([a]), np.array([abs(b)]))
        return float(m[0, 0])

    found = []
    thresh = 1e-2 * (1 + np.median(np.sqrt(scale)))
    for i in range(n):
        for j in range(n):
            window = M[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if M[i, j] <= window.min() and M[i, j] < thresh:
                res = minimize(objective, [A[i], B[j]], method="Nelder-Mead",
                               options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
                if res.fun < 1e-8:
                    found.append((float(res.x[0]), abs(float(res.x[1]))))
    return [as_sphere(p, f.level) for p in _merge(found, 1e-6)]


def _half_slice_report(f, rect):
    """``N(f)`` vanishes on the whole grid: report the half-slice carrying the zeros."""
    a0, a1, b0, b1 = rect
    a, b = (a0 + a1) / 2, max(b0, 0) + (b1 - max(b0, 0)) / 2 or 1.0
    sph = as_sphere((a, b), f.level)
    cls = classify_sphere_zeros(f, sph, tol=1e-6)
    if cls.tag != POINT:
        return [SphereZeroClass(HALF_SLICE, sph, verified=False)]
    J0 = (cls.point - a) / b
    return [SphereZeroClass(HALF_SLICE, sph, point=J0, verified=cls.verified)]
