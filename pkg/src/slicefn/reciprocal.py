"""Multiplicative inverses of slice functions and the sphere maps they induce."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial import cKDTree

from .cayley_dickson import Element, associator
from .errors import (
    NormalIdenticallyZero,
    PhiUndefined,
    PoleProximity,
    SphericalDerivativeVanishes,
    ZeroNotInvertible,
)
from .slice_rep import SliceFunction, lift, normal_stem, point_stem_args
from .star_poly import SemiregularForm, StarPolynomial

PHI_TOL = 1e-12
POLE_TOL = 1e-12
ASSOCIATOR_TOL = 1e-10
DERIVATIVE_TOL = 1e-12


def _vanishes(value, tol):
    """Exact zero test in rational mode, ``<= tol`` in double mode."""
    if isinstance(value, Element):
        return value.is_zero() if value.exact else value.is_zero(tol)
    if isinstance(value, float):
        return abs(value) <= tol
    return value == 0


def phi(a, b, tol=PHI_TOL):
    """``(n(a) a^c + b^c a b^c) / ((n(a) - n(b))^2 + t(b^c a)^2)``."""
    a, b = lift(a, b)
    bc = b.conj()
    bca = bc * a
    den = (a.norm() - b.norm()) ** 2 + bca.trace() ** 2
    if _vanishes(den, tol):
        raise PhiUndefined("n(a) = n(b) and t(b^c a) = 0")
    return (a.conj() * a.norm() + bca * bc) / den


def reciprocal_stem(vs, ds, beta_sq, tol=PHI_TOL):
    """Stem of ``f^{-*}`` from the stem of ``f`` via the Phi representation.

    Written in ``beta^2`` only: with ``a = vs`` and ``d = ds`` the denominator is
    ``(n(a) - beta^2 n(d))^2 + beta^2 t(d^c a)^2``.
    """
    if ds is None or beta_sq == 0:
        return vs.inverse(), None if ds is None else _reciprocal_real_ds(vs, ds)
    a, d = lift(vs, ds)
    if not a.exact:
        beta_sq = float(beta_sq)
    dc = d.conj()
    na, nd = a.norm(), d.norm()
    t = (dc * a).trace()
    den = (na - beta_sq * nd) ** 2 + beta_sq * t * t
    if _vanishes(den, tol):
        raise PhiUndefined("the normal function vanishes on this sphere")
    v = (a.conj() * na + ((dc * a) * dc) * beta_sq) / den
    w = -(dc * (beta_sq * nd) + (a.conj() * d) * a.conj()) / den
    return v, w


def _reciprocal_real_ds(vs, ds):
    # derivative of 1/f on the real axis: -vs^{-1} ds vs^{-1}
    inv, ds = lift(vs.inverse(), ds)
    return -((inv * ds) * inv)


class ReciprocalFunction(SliceFunction):
    """``N(f)^{-1} f^c`` for a general slice function."""

    def __init__(self, f, probe=16, seed=0):
        super().__init__(f.level, f.domain)
        self.f = f
        rng = np.random.default_rng(seed)
        from .slice_rep import _sample_region_points

        pts = _sample_region_points(f.domain, probe, rng)
        vals = []
        for a, b in pts:
            try:
                nv, nd = normal_stem(*f._stem(a, b * b), b * b)
            except Exception:  # noqa: BLE001 - unevaluable probe points just don't count
                continue
            vals.append(abs(float(nv.coords[0])) + b * abs(float(nd.coords[0])))
        if vals and max(vals) <= 1e-14:
            raise NormalIdenticallyZero("the normal function vanishes on every probe point")

    def _stem(self, alpha, beta_sq):
        vs, ds = self.f._stem(alpha, beta_sq)
        try:
            return reciprocal_stem(vs, ds, beta_sq)
        except (PhiUndefined, ZeroNotInvertible) as exc:
            raise PoleProximity(str(exc)) from exc


def star_reciprocal(f):
    """The star inverse on the complement of the zero spheres of ``N(f)``."""
    if isinstance(f, StarPolynomial):
        f = SemiregularForm(f, StarPolynomial([Element.real(1, f.level)]))
    if isinstance(f, SemiregularForm):
        r = f.reciprocal()
        return r.simplified()
    return ReciprocalFunction(f)


def _pole_guard(f, x, vs, ds):
    alpha, b2 = point_stem_args(x)
    nv, nd = normal_stem(vs, ds, b2)
    size = abs(float(nv.coords[0])) + (0 if nd is None else math.sqrt(float(b2)) * abs(float(nd.coords[0])))
    deg = getattr(f, "degree", 1)
    if size == 0 or size < POLE_TOL * (1 + abs(x)) ** (2 * max(deg, 1)):
        raise PoleProximity(f"the normal function vanishes near {x}")


def reciprocal_via_phi(f, x):
    """Value of ``f^{-*}`` at ``x`` from the Phi representation."""
    f._check_point(x)
    alpha, b2 = point_stem_args(x)
    vs, ds = f._stem(alpha, b2)
    _pole_guard(f, x, vs, ds)
    if b2 == 0 or ds is None or _vanishes(ds, DERIVATIVE_TOL):
        inv = vs.inverse()
        return inv if x.exact == inv.exact else inv.to_double()
    v, w = reciprocal_stem(vs, ds, b2)
    im, v, w = lift(x.im(), v, w)
    return v + im * w


# ---------------------------------------------------------------------------
# the sphere map T_f


def _conj_value(x, vs, ds):
    im, vs, ds = lift(x.im(), vs, ds)
    return vs.conj() + im * ds.conj()


def _ingredients(f, x):
    f._check_point(x)
    vs, ds = f._stem(*point_stem_args(x))
    _pole_guard(f, x, vs, ds)
    return vs, ds


def t_f(f, x):
    """``(f^c(x)^{-1} ((x f^c(x)) f'_s(x))) f'_s(x)^{-1}``; the identity on real points."""
    if x.is_real():
        return x
    vs, ds = _ingredients(f, x)
    if ds is None or _vanishes(ds, DERIVATIVE_TOL):
        raise SphericalDerivativeVanishes(f"the spherical derivative vanishes at {x}")
    fc = _conj_value(x, vs, ds)
    x, fc, ds = lift(x, fc, ds)
    return (fc.inverse() * ((x * fc) * ds)) * ds.inverse()


def t_f_inverse(f, x):
    return t_f(star_reciprocal(f), x)


def t_f_special(f, x):
    """Conjugation form ``f^c(x)^{-1} x f^c(x)``."""
    vs, ds = _ingredients(f, x)
    fc = _conj_value(x, vs, ds)
    x, fc = lift(x, fc)
    return (fc.inverse() * x) * fc


def associator_value(f, x):
    """``(x, f^c(x), f'_s(x))``."""
    vs, ds = _ingredients(f, x)
    if ds is None:
        return Element.zero(x.level, exact=x.exact)
    fc = _conj_value(x, vs, ds)
    return associator(*lift(x, fc, ds))


def associator_vanishes(f, x, tol=ASSOCIATOR_TOL):
    a = associator_value(f, x)
    return a.is_zero() if a.exact else abs(a) < tol


def associator_status(f, x, tol=ASSOCIATOR_TOL):
    """``"vanishes"``, ``"nonzero"`` or ``"indeterminate"`` (within a factor 10 of ``tol``)."""
    a = associator_value(f, x)
    if a.exact:
        return "vanishes" if a.is_zero() else "nonzero"
    size = abs(a)
    if tol / 10 < size < tol * 10:
        return "indeterminate"
    return "vanishes" if size <= tol / 10 else "nonzero"


@dataclass
class LimitProbe:
    points: list
    values: list
    spread: float

    @property
    def limit(self):
        return self.values[-1]


def directional_limit_probe(f, path, ts=None):
    """Evaluate ``T_f`` along ``path(t)`` as ``t -> 0``; report the values and their final spread."""
    ts = ts if ts is not None else [10.0 ** (-k) for k in range(2, 6)]
    pts = [path(t) for t in ts]
    vals = [t_f(f, p) for p in pts]
    spread = abs(vals[-1] - vals[-2]) if len(vals) > 1 else 0.0
    return LimitProbe(pts, vals, spread)


# ---------------------------------------------------------------------------
# constants


def constant_translation_points(c, f, x):
    """Points ``y, z`` of the sphere of ``x`` with ``(c*f)(x) = c f(y)`` and ``(f*c)(x) = f(z) c``."""
    if c.is_zero():
        raise ZeroNotInvertible("the constant must be nonzero")
    if x.is_real():
        return x, x
    vs, ds = f._stem(*point_stem_args(x))
    if ds is None or _vanishes(ds, DERIVATIVE_TOL):
        return x, x
    x, c, ds = lift(x, c, ds)
    ci, di = c.inverse(), ds.inverse()
    y = (ci * (x * (c * ds))) * di
    z = ((x * (ds * c)) * ci) * di
    return y, z


def reciprocal_image(f, samples):
    """Sampled ``f^{-*}(C)`` and ``{f(x)^{-1}}`` with their symmetric Hausdorff distance."""
    rec = star_reciprocal(f)
    A = np.array([rec.evaluate(x).as_array() for x in samples])
    B = np.array([f.evaluate(x).inverse().as_array() for x in samples])
    da, _ = cKDTree(B).query(A)
    db, _ = cKDTree(A).query(B)
    return {"reciprocal_values": A, "inverted_values": B,
            "hausdorff": float(max(da.max(), db.max()))}
