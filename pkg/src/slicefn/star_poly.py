"""Closed-form slice functions: star polynomials, quotients by real polynomials
and finite Laurent windows around a real centre.

Stems are computed from the power recurrence for ``x^n`` at ``(alpha, beta^2)``
so that exact inputs give exact outputs, including on the real axis.
"""

from fractions import Fraction
import math
import numbers

import numpy as np

from .cayley_dickson import LEVEL_NAMES, NAME_LEVELS, Element
from .errors import (
    AlgebraMismatch,
    NormalIdenticallyZero,
    OutOfAnnulus,
    PoleProximity,
    ZeroNotInvertible,
)
from .slice_rep import SliceFunction, StemGrid, lift

POLE_TOL = 1e-12


def _is_rational(v):
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _common_mode(elements):
    if all(e.exact for e in elements):
        return list(elements)
    return [e.to_double() for e in elements]


def power_stems(alpha, beta_sq, n):
    """Lists ``v_m, d_m`` (m = 0..n) with ``x^m = v_m + im(x) d_m``, real scalars."""
    one = Fraction(1) if _is_rational(alpha) and _is_rational(beta_sq) else 1.0
    zero = one - one
    v, d = [one], [zero]
    for _ in range(n):
        pv, pd = v[-1], d[-1]
        v.append(alpha * pv - beta_sq * pd)
        d.append(pv + alpha * pd)
    return v, d


def power_stems_batch(alpha, beta_sq, n):
    """Vectorised ``power_stems``: arrays of shape ``alpha.shape + (n+1,)``."""
    alpha = np.asarray(alpha, dtype=float)
    beta_sq = np.asarray(beta_sq, dtype=float)
    V = np.empty(alpha.shape + (n + 1,))
    D = np.empty_like(V)
    V[..., 0], D[..., 0] = 1.0, 0.0
    for m in range(n):
        V[..., m + 1] = alpha * V[..., m] - beta_sq * D[..., m]
        D[..., m + 1] = V[..., m] + alpha * D[..., m]
    return V, D


def _combine(scalars, coeffs, level, exact):
    """``sum scalars[m] * coeffs[m]`` in the requested mode."""
    if exact:
        acc = [Fraction(0)] * (1 << level)
        for s, c in zip(scalars, coeffs):
            if s == 0:
                continue
            acc = [a + s * q for a, q in zip(acc, c.coords)]
        return Element(acc)
    if not coeffs:
        return Element.zero(level, exact=False)
    C = np.array([[float(q) for q in c.coords] for c in coeffs])
    return Element.from_array(np.asarray([float(s) for s in scalars]) @ C)


# ---------------------------------------------------------------------------


class StarPolynomial(SliceFunction):
    """``sum_n x^n a_n`` with right coefficients ``a_n``."""

    closed_form = True

    def __init__(self, coeffs, level=None):
        coeffs = list(coeffs)
        if coeffs:
            levels = {c.level for c in coeffs}
            if len(levels) != 1 or (level is not None and level not in levels):
                raise AlgebraMismatch("coefficients live in different algebras")
            level = levels.pop()
        elif level is None:
            raise ValueError("the zero polynomial needs an explicit level")
        coeffs = _common_mode(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        super().__init__(level)
        self.coeffs = tuple(coeffs)

    # constructors ---------------------------------------------------------

    @classmethod
    def variable(cls, level):
        return cls([Element.zero(level), Element.real(1, level)])

    @classmethod
    def constant(cls, c):
        return cls([c])

    @classmethod
    def from_real(cls, values, level):
        return cls([Element.real(v, level) for v in values], level)

    # basic properties -----------------------------------------------------

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def exact(self):
        return all(c.exact for c in self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def has_real_coeffs(self, tol=0.0):
        return all(c.is_real(tol) for c in self.coeffs)

    def real_coeffs(self):
        return [c.coords[0] for c in self.coeffs]

    def coeff(self, n):
        if 0 <= n < len(self.coeffs):
            return self.coeffs[n]
        return Element.zero(self.level, exact=self.exact)

    def to_double(self):
        return StarPolynomial([c.to_double() for c in self.coeffs], self.level)

    def __eq__(self, other):
        if isinstance(other, StarPolynomial):
            return self.level == other.level and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.level, self.coeffs))

    def __repr__(self):
        return f"StarPolynomial([{', '.join(str(c) for c in self.coeffs)}])"

    def isclose(self, other, tol=1e-10):
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coeff(i).isclose(other.coeff(i), tol) for i in range(n))

    # stems ----------------------------------------------------------------

    def _stem(self, alpha, beta_sq):
        exact = self.exact and _is_rational(alpha) and _is_rational(beta_sq)
        v, d = power_stems(alpha, beta_sq, max(self.degree, 0))
        return (_combine(v, self.coeffs, self.level, exact),
                _combine(d, self.coeffs, self.level, exact))

    def stem_batch(self, alpha, beta_sq):
        V, D = power_stems_batch(alpha, beta_sq, max(self.degree, 0))
        C = self._coeff_matrix()
        return V @ C, D @ C

    def _coeff_matrix(self):
        if not self.coeffs:
            return np.zeros((1, 1 << self.level))
        return np.array([[float(q) for q in c.coords] for c in self.coeffs])

    def is_slice_preserving(self, sample_count=None, seed=None):
        return self.has_real_coeffs()

    # algebra ----------------------------------------------------------------

    def star(self, other):
        if isinstance(other, SemiregularForm):
            return SemiregularForm(self, _one_poly(self.level)).star(other)
        if isinstance(other, Element):
            other = StarPolynomial([other])
        if not isinstance(other, StarPolynomial):
            from .slice_rep import ProductFunction

            return ProductFunction(self, other)
        if other.level != self.level:
            raise AlgebraMismatch("factors live in different algebras")
        if not self.coeffs or not other.coeffs:
            return StarPolynomial([], self.level)
        a, b = lift_lists(self.coeffs, other.coeffs)
        out = []
        for n in range(len(a) + len(b) - 1):
            acc = None
            for k in range(max(0, n - len(b) + 1), min(n, len(a) - 1) + 1):
                term = a[k] * b[n - k]
                acc = term if acc is None else acc + term
            out.append(acc)
        return StarPolynomial(out, self.level)

    def conj(self):
        return StarPolynomial([c.conj() for c in self.coeffs], self.level)

    def normal(self):
        """``f * f^c``; its coefficients are real and are stored as such."""
        p = self.star(self.conj())
        return StarPolynomial([Element.real(c.coords[0], self.level) for c in p.coeffs], self.level)

    def _binary(self, other, sign):
        if isinstance(other, SemiregularForm):
            return SemiregularForm(self, _one_poly(self.level))._binary(other, sign)
        if isinstance(other, SliceFunction) and not isinstance(other, StarPolynomial):
            return super().__add__(other) if sign > 0 else super().__sub__(other)
        if not isinstance(other, StarPolynomial):
            other = _as_constant(other, self.level)
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            p, q = lift(self.coeff(i), other.coeff(i))
            out.append(p + q if sign > 0 else p - q)
        return StarPolynomial(out, self.level)

    def __add__(self, other):
        return self._binary(other, 1)

    def __radd__(self, other):
        return _as_constant(other, self.level)._binary(self, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __rsub__(self, other):
        return _as_constant(other, self.level)._binary(self, -1)

    def __neg__(self):
        return StarPolynomial([-c for c in self.coeffs], self.level)

    def __mul__(self, other):
        """Star product; an element or real on the right multiplies every coefficient."""
        if isinstance(other, numbers.Real):
            return StarPolynomial([c * other for c in self.coeffs], self.level)
        if isinstance(other, Element):
            return StarPolynomial([p * q for p, q in (lift(c, other) for c in self.coeffs)], self.level)
        return self.star(other)

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return self * other
        if isinstance(other, Element):
            return StarPolynomial([p * q for p, q in (lift(other, c) for c in self.coeffs)], self.level)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("star powers of polynomials need a non-negative integer")
        out = _one_poly(self.level)
        for _ in range(n):
            out = out.star(self)
        return out

    def reciprocal(self):
        return SemiregularForm(self, _one_poly(self.level)).reciprocal()

    # serialisation ----------------------------------------------------------

    def to_json(self):
        return {"kind": "starpoly", "algebra": LEVEL_NAMES[self.level],
                "coeffs": [c.to_json() for c in self.coeffs]}


def _one_poly(level):
    return StarPolynomial([Element.real(1, level)])


def lift_lists(a, b):
    if all(c.exact for c in a) and all(c.exact for c in b):
        return list(a), list(b)
    return [c.to_double() for c in a], [c.to_double() for c in b]


def _as_constant(value, level):
    if isinstance(value, StarPolynomial):
        return value
    if isinstance(value, Element):
        return StarPolynomial([value], level)
    if isinstance(value, numbers.Real):
        return StarPolynomial([Element.real(value, level)], level)
    raise TypeError(f"cannot use {value!r} as a star polynomial")


# ---------------------------------------------------------------------------
# real polynomials (used to cancel common factors exactly)


def _real_divmod(num, den):
    """Long division of real coefficient lists (lowest degree first)."""
    num = list(num)
    q = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    while len(num) >= len(den) and any(num):
        shift = len(num) - len(den)
        c = num[-1] / lead
        q[shift] = c
        for i, d in enumerate(den):
            num[shift + i] -= c * d
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return q, num


def _real_gcd(a, b):
    while b:
        _, r = _real_divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a] if a else a


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


# ---------------------------------------------------------------------------


class SemiregularForm(SliceFunction):
    """``den(x)^{-1} num(x)`` with ``den`` a nonzero real-coefficient polynomial."""

    closed_form = True

    def __init__(self, num, den):
        if not isinstance(den, StarPolynomial):
            den = _as_constant(den, num.level)
        if den.is_zero():
            raise ZeroNotInvertible("the denominator is identically zero")
        if not den.has_real_coeffs():
            raise ValueError("the denominator must have real coefficients")
        if den.level != num.level:
            raise AlgebraMismatch("numerator and denominator live in different algebras")
        super().__init__(num.level)
        self.num = num
        self.den = den

    @property
    def exact(self):
        return self.num.exact and self.den.exact

    def __repr__(self):
        return f"SemiregularForm(num={self.num!r}, den={self.den.real_coeffs()})"

    def reduced(self):
        """Cancel the largest real factor shared by numerator and denominator (exact mode)."""
        if not self.exact or self.num.is_zero():
            return self
        den = _trim(self.den.real_coeffs())
        g = den
        for t in range(1 << self.level):
            g = _real_gcd(g, _trim([c.coords[t] for c in self.num.coeffs]))
            if len(g) == 1:
                return self
        new_den, _ = _real_divmod(den, g)
        cols = []
        for t in range(1 << self.level):
            q, _ = _real_divmod(_trim([c.coords[t] for c in self.num.coeffs]) or [Fraction(0)], g)
            cols.append(q)
        n = max(len(c) for c in cols)
        coeffs = [Element([cols[t][m] if m < len(cols[t]) else Fraction(0)
                           for t in range(1 << self.level)]) for m in range(n)]
        return SemiregularForm(StarPolynomial(coeffs, self.level),
                               StarPolynomial.from_real(new_den, self.level))

    def simplified(self):
        """A plain polynomial when the reduced denominator is constant, else ``self`` reduced."""
        r = self.reduced()
        if r.den.degree == 0:
            inv = 1 / r.den.real_coeffs()[0]
            return r.num * inv
        return r

    def pole_spheres(self):
        """``(alpha, beta)`` of the spheres where the denominator vanishes."""
        coeffs = [float(c) for c in self.den.real_coeffs()]
        if len(coeffs) <= 1:
            return []
        roots = np.roots(coeffs[::-1])
        out = []
        for r in roots:
            key = (round(float(r.real), 12), round(abs(float(r.imag)), 12))
            if key not in out:
                out.append(key)
        return out

    def _stem(self, alpha, beta_sq):
        A, B = self.num._stem(alpha, beta_sq)
        vq, dq = self.den._stem(alpha, beta_sq)
        vq, dq = vq.coords[0], dq.coords[0]
        M = vq * vq + beta_sq * dq * dq
        scale = (1 + math.sqrt(float(alpha) ** 2 + float(beta_sq))) ** self.den.degree
        if M == 0 or math.sqrt(float(M)) < POLE_TOL * scale:
            raise PoleProximity(f"denominator vanishes on the sphere ({alpha}, beta^2={beta_sq})")
        A, B = lift(A, B)
        if not A.exact:
            vq, dq, M, beta_sq = float(vq), float(dq), float(M), float(beta_sq)
        vs = (A * vq + B * (beta_sq * dq)) / M
        ds = (B * vq - A * dq) / M
        return vs, ds

    def stem_batch(self, alpha, beta_sq):
        A, B = self.num.stem_batch(alpha, beta_sq)
        vq, dq = self.den.stem_batch(alpha, beta_sq)
        vq, dq = vq[..., :1], dq[..., :1]
        b2 = np.asarray(beta_sq, dtype=float)[..., None]
        M = vq * vq + b2 * dq * dq
        with np.errstate(divide="ignore", invalid="ignore"):
            return (vq * A + b2 * dq * B) / M, (vq * B - dq * A) / M

    def is_slice_preserving(self, sample_count=None, seed=None):
        return self.num.has_real_coeffs()

    # algebra ------------------------------------------------------------------

    def star(self, other):
        if isinstance(other, (StarPolynomial, Element)):
            other = SemiregularForm(_as_constant(other, self.level), _one_poly(self.level))
        if not isinstance(other, SemiregularForm):
            from .slice_rep import ProductFunction

            return ProductFunction(self, other)
        return SemiregularForm(self.num.star(other.num), self.den.star(other.den))

    __mul__ = star

    def conj(self):
        return SemiregularForm(self.num.conj(), self.den)

    def normal(self):
        return SemiregularForm(self.num.normal(), self.den.star(self.den))

    def reciprocal(self):
        """``(q P^c, N(P))`` for ``(P, q)``."""
        N = self.num.normal()
        if N.is_zero():
            raise NormalIdenticallyZero("the numerator has identically vanishing normal")
        return SemiregularForm(self.den.star(self.num.conj()), N)

    def _binary(self, other, sign):
        if isinstance(other, (StarPolynomial, Element, numbers.Real)):
            other = SemiregularForm(_as_constant(other, self.level), _one_poly(self.level))
        if not isinstance(other, SemiregularForm):
            return SliceFunction.__add__(self, other) if sign > 0 else SliceFunction.__sub__(self, other)
        left = self.num.star(other.den)
        right = other.num.star(self.den)
        num = left + right if sign > 0 else left - right
        return SemiregularForm(num, self.den.star(other.den))

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return SemiregularForm(-self.num, self.den)

    def to_json(self):
        return {"kind": "semiregular", "algebra": LEVEL_NAMES[self.level],
                "num": self.num.to_json(),
                "den_real_coeffs": [str(c) if isinstance(c, Fraction) else float(c)
                                    for c in self.den.real_coeffs()]}


# ---------------------------------------------------------------------------


def delta_poly(y):
    """``x^2 - x t(y) + n(y)``, the real polynomial vanishing exactly on the sphere of ``y``."""
    level = y.level
    return StarPolynomial([Element.real(y.norm(), level), Element.real(-y.trace(), level),
                           Element.real(1, level)])


def linear_factor(y):
    """``x - y``."""
    return StarPolynomial([-y, Element.real(1, y.level)])


def star_power(y, n):
    """``(x - y)^{*n}``; negative powers come back as a ``SemiregularForm``."""
    if n >= 0:
        return linear_factor(y) ** n
    m = -n
    return SemiregularForm(linear_factor(y.conj()) ** m, delta_poly(y) ** m)


# ---------------------------------------------------------------------------


class StarLaurent(SliceFunction):
    """``sum_n (x - y)^n a_n`` over a finite window of exponents, real centre ``y``.

    Evaluation is restricted to ``r_inner < |x - y| < r_outer``.
    """

    closed_form = True

    def __init__(self, center, coeffs, level=None, r_inner=0.0, r_outer=math.inf):
        coeffs = {int(k): v for k, v in dict(coeffs).items()}
        if level is None:
            if not coeffs:
                raise ValueError("an empty window needs an explicit level")
            level = next(iter(coeffs.values())).level
        super().__init__(level)
        if isinstance(center, Element):
            if not center.is_real():
                raise ValueError("Laurent centres must be real")
            center = center.coords[0]
        self.center = center
        mode = _common_mode(list(coeffs.values()))
        self.coeffs = dict(zip(coeffs.keys(), mode))
        self.r_inner = r_inner
        self.r_outer = r_outer

    @property
    def window(self):
        return (min(self.coeffs), max(self.coeffs)) if self.coeffs else (0, -1)

    def __repr__(self):
        return f"StarLaurent(center={self.center}, window={self.window})"

    def _check_annulus(self, alpha, beta_sq):
        r = math.sqrt((float(alpha) - float(self.center)) ** 2 + float(beta_sq))
        if not self.r_inner < r < self.r_outer:
            raise OutOfAnnulus(f"|x - y| = {r} outside ({self.r_inner}, {self.r_outer})")

    def _stem(self, alpha, beta_sq):
        self._check_annulus(alpha, beta_sq)
        a = alpha - self.center
        exact = (all(c.exact for c in self.coeffs.values()) and _is_rational(a)
                 and _is_rational(beta_sq))
        if not exact:
            a, beta_sq = float(a), float(beta_sq)
        lo, hi = self.window
        keys, vs_s, ds_s = [], [], []
        if hi >= 0:
            v, d = power_stems(a, beta_sq, hi)
            for n in range(max(lo, 0), hi + 1):
                keys.append(n)
                vs_s.append(v[n])
                ds_s.append(d[n])
        if lo < 0:
            m = a * a + beta_sq
            vb, db = a / m, -1 / m  # (x - y)^{-1}
            v, d = vb, db
            for n in range(-1, lo - 1, -1):
                if n <= hi:
                    keys.append(n)
                    vs_s.append(v)
                    ds_s.append(d)
                v, d = v * vb - beta_sq * d * db, v * db + d * vb
        coeffs = [self.coeffs.get(k, Element.zero(self.level, exact)) for k in keys]
        coeffs = [c if exact else c.to_double() for c in coeffs]
        return (_combine(vs_s, coeffs, self.level, exact), _combine(ds_s, coeffs, self.level, exact))

    def stem_batch(self, alpha, beta_sq):
        a = np.asarray(alpha, dtype=float) - float(self.center)
        b2 = np.asarray(beta_sq, dtype=float)
        dim = 1 << self.level
        vs = np.zeros(a.shape + (dim,))
        ds = np.zeros_like(vs)
        lo, hi = self.window
        if hi >= 0:
            V, D = power_stems_batch(a, b2, hi)
            for n in range(max(lo, 0), hi + 1):
                if n in self.coeffs:
                    c = self.coeffs[n].as_array()
                    vs += V[..., n, None] * c
                    ds += D[..., n, None] * c
        if lo < 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                m = a * a + b2
                vb, db = a / m, -1 / m
            v, d = vb, db
            for n in range(-1, lo - 1, -1):
                if n in self.coeffs and n <= hi:
                    c = self.coeffs[n].as_array()
                    vs += v[..., None] * c
                    ds += d[..., None] * c
                v, d = v * vb - b2 * d * db, v * db + d * vb
        return vs, ds

    def conj(self):
        return StarLaurent(self.center, {k: v.conj() for k, v in self.coeffs.items()},
                           self.level, self.r_inner, self.r_outer)

    def is_slice_preserving(self, sample_count=None, seed=None):
        return all(c.is_real() for c in self.coeffs.values())

    def to_json(self):
        c = self.center
        return {"kind": "laurent", "algebra": LEVEL_NAMES[self.level],
                "center": str(c) if isinstance(c, Fraction) else c,
                "coeffs": {str(k): v.to_json() for k, v in sorted(self.coeffs.items())}}


def laurent_evaluate(s, x, r_inner=None, r_outer=None):
    """Evaluate ``s`` at ``x``, optionally overriding its annulus radii."""
    if r_inner is not None or r_outer is not None:
        s = StarLaurent(s.center, s.coeffs, s.level,
                        s.r_inner if r_inner is None else r_inner,
                        s.r_outer if r_outer is None else r_outer)
    return s.evaluate(x)


def truncated_exp_inverse(level, terms=40):
    """``sum_{n<=terms} x^{-n}/n!`` as a Laurent window at 0."""
    return StarLaurent(0, {-n: Element.real(Fraction(1, math.factorial(n)), level)
                           for n in range(terms + 1)}, level)


# ---------------------------------------------------------------------------
# JSON


def function_from_json(data):
    kind = data.get("kind")
    if kind == "starpoly":
        coeffs = [Element.from_json(c) for c in data["coeffs"]]
        level = NAME_LEVELS[data["algebra"]] if "algebra" in data else None
        return StarPolynomial(coeffs, level)
    if kind == "semiregular":
        num = function_from_json(data["num"])
        den = [Fraction(c) if isinstance(c, str) else c for c in data["den_real_coeffs"]]
        return SemiregularForm(num, StarPolynomial.from_real(den, num.level))
    if kind == "stem":
        return StemGrid.from_json(data)
    if kind == "laurent":
        coeffs = {int(k): Element.from_json(v) for k, v in data["coeffs"].items()}
        c = data["center"]
        return StarLaurent(Fraction(c) if isinstance(c, str) else c, coeffs,
                           NAME_LEVELS[data["algebra"]])
    raise ValueError(f"unknown function kind {kind!r}")
