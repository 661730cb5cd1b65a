"""Slice functions represented through their stems.

A slice function is determined on each sphere ``alpha + beta*S`` by two
J-independent values, the spherical value ``vs`` and the spherical derivative
``ds``, via ``f(alpha + beta J) = vs + (beta J) ds``.  Every class here
answers ``_stem(alpha, beta_sq)``; keeping ``beta`` squared lets closed forms
stay exact and extend ``ds`` to the real axis.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .cayley_dickson import (
    Element,
    exact_sqrt,
    is_imaginary_unit,
    mul_arrays,
    norm_arrays,
    random_unit,
    splitting_basis,
)
from .errors import (
    AlgebraMismatch,
    EmptyDomainIntersection,
    GridTooSmall,
    NotImaginaryUnit,
    OutOfDomain,
    RealPointDerivative,
)

SLICE_PRESERVING_TOL = 1e-10


def lift(*elements):
    """Bring elements to a common numeric mode (double wins)."""
    if all(e is None or e.exact for e in elements) or all(e is None or not e.exact for e in elements):
        return elements
    return tuple(None if e is None else e.to_double() for e in elements)


def point_stem_args(x):
    """``(alpha, beta^2)`` of a point, exact whenever ``x`` is exact."""
    im = x.coords[1:]
    return x.coords[0], sum(c * c for c in im)


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Rect:
    """``a0 <= alpha <= a1``, ``b0 <= beta <= b1`` (``beta > b0`` when ``strict_bottom``)."""

    a0: float = -math.inf
    a1: float = math.inf
    b0: float = 0.0
    b1: float = math.inf
    strict_bottom: bool = False

    def contains(self, alpha, beta):
        if not self.a0 <= alpha <= self.a1 or beta > self.b1:
            return False
        return beta > self.b0 if self.strict_bottom else beta >= self.b0

    def touches_real(self):
        return self.b0 == 0 and not self.strict_bottom and self.a0 <= self.a1

    def bbox(self):
        return self.a0, self.a1, self.b0, self.b1


@dataclass(frozen=True)
class AnnularSector:
    """Polar region around a point ``center`` of the closed upper half-plane."""

    center: complex
    r0: float
    r1: float
    theta0: float = 0.0
    theta1: float = math.pi

    def contains(self, alpha, beta):
        if beta < 0:
            return False
        z = complex(alpha, beta) - self.center
        r = abs(z)
        if not self.r0 <= r <= self.r1:
            return False
        if r == 0:
            return True
        th = math.atan2(z.imag, z.real)
        return self.theta0 <= th <= self.theta1 or self.theta0 <= th + 2 * math.pi <= self.theta1

    def touches_real(self):
        c = self.center
        return any(self.contains(a, 0.0) for a in np.linspace(c.real - self.r1, c.real + self.r1, 401))

    def bbox(self):
        c = self.center
        return c.real - self.r1, c.real + self.r1, max(0.0, c.imag - self.r1), c.imag + self.r1


@dataclass(frozen=True)
class Intersection:
    first: object
    second: object

    def contains(self, alpha, beta):
        return self.first.contains(alpha, beta) and self.second.contains(alpha, beta)

    def bbox(self):
        p, q = self.first.bbox(), self.second.bbox()
        return max(p[0], q[0]), min(p[1], q[1]), max(p[2], q[2]), min(p[3], q[3])

    def touches_real(self):
        a0, a1, b0, _ = self.bbox()
        if b0 > 0 or a0 > a1:
            return False
        return any(self.contains(a, 0.0) for a in _span(a0, a1, 401))

    def is_empty(self):
        return not _sample_region(self)


def _span(a, b, n):
    a, b = max(a, -1e3), min(b, 1e3)
    return np.linspace(a, b, n) if a <= b else np.array([])


def _sample_region(region, n=60):
    a0, a1, b0, b1 = region.bbox()
    pts = [(a, b) for a in _span(a0, a1, n) for b in _span(max(b0, 0.0), b1, n)]
    return [p for p in pts if region.contains(*p)]


def _regions_overlap(p, q):
    if isinstance(p, Rect) and isinstance(q, Rect):
        return max(p.a0, q.a0) <= min(p.a1, q.a1) and max(p.b0, q.b0) <= min(p.b1, q.b1)
    return bool(_sample_region(Intersection(p, q)))


@dataclass(frozen=True)
class DomainSpec:
    """A circular set given by a union of regions of the closed upper half-plane.

    ``holes`` lists ``(alpha, beta)`` spheres removed from the set (for example
    the zero spheres of a normal function).
    """

    regions: tuple = (Rect(),)
    holes: tuple = field(default=())

    @classmethod
    def whole(cls):
        return cls((Rect(),))

    @classmethod
    def off_real(cls):
        return cls((Rect(strict_bottom=True),))

    @classmethod
    def rect(cls, a0, a1, b0, b1):
        return cls((Rect(a0, a1, b0, b1),))

    def contains(self, alpha, beta, hole_tol=1e-12):
        alpha, beta = float(alpha), abs(float(beta))
        for ha, hb in self.holes:
            if abs(alpha - ha) <= hole_tol and abs(beta - hb) <= hole_tol:
                return False
        return any(r.contains(alpha, beta) for r in self.regions)

    def contains_point(self, x):
        alpha, b2 = point_stem_args(x)
        return self.contains(float(alpha), math.sqrt(float(b2)))

    def _connected(self):
        n = len(self.regions)
        seen, stack = {0}, [0]
        while stack:
            a = stack.pop()
            for b in range(n):
                if b not in seen and _regions_overlap(self.regions[a], self.regions[b]):
                    seen.add(b)
                    stack.append(b)
        return len(seen) == n

    @property
    def kind(self):
        if not self._connected():
            return "Union"
        if any(r.touches_real() for r in self.regions):
            return "SliceDomain"
        return "ProductDomain"

    def intersect(self, other):
        regions = []
        for p in self.regions:
            for q in other.regions:
                if isinstance(p, Rect) and isinstance(q, Rect):
                    r = Rect(max(p.a0, q.a0), min(p.a1, q.a1), max(p.b0, q.b0), min(p.b1, q.b1),
                             p.strict_bottom or q.strict_bottom)
                    if r.a0 <= r.a1 and r.b0 <= r.b1:
                        regions.append(r)
                elif _regions_overlap(p, q):
                    regions.append(Intersection(p, q))
        if not regions:
            raise EmptyDomainIntersection("domains do not intersect")
        return DomainSpec(tuple(regions), tuple(set(self.holes) | set(other.holes)))

    def without_spheres(self, spheres):
        return DomainSpec(self.regions, tuple(self.holes) + tuple((float(a), float(b)) for a, b in spheres))


# ---------------------------------------------------------------------------
# base class


class SliceFunction:
    """Base class.  Subclasses implement ``_stem(alpha, beta_sq)``."""

    closed_form = False

    def __init__(self, level, domain=None):
        self.level = level
        self.domain = DomainSpec.whole() if domain is None else domain

    def _stem(self, alpha, beta_sq):
        raise NotImplementedError

    def stem(self, alpha, beta):
        """``(vs, ds)`` on the sphere ``alpha + beta*S``; ``ds`` may be None on the real axis."""
        return self._stem(alpha, beta * beta)

    def _check_point(self, x):
        if x.level != self.level:
            raise AlgebraMismatch(f"point in level {x.level}, function in level {self.level}")
        if not self.domain.contains_point(x):
            raise OutOfDomain(f"{x} is outside the domain")

    def evaluate(self, x):
        self._check_point(x)
        alpha, b2 = point_stem_args(x)
        vs, ds = self._stem(alpha, b2)
        if b2 == 0:
            return vs if x.exact == vs.exact else vs.to_double()
        im, vs, ds = lift(x.im(), vs, ds)
        return vs + im * ds

    __call__ = evaluate

    def spherical_value(self, x):
        self._check_point(x)
        vs, _ = self._stem(*point_stem_args(x))
        return vs

    def spherical_derivative(self, x):
        self._check_point(x)
        _, ds = self._stem(*point_stem_args(x))
        if ds is None:
            raise RealPointDerivative(f"no spherical derivative stored at real point {x}")
        return ds

    def stem_batch(self, alpha, beta_sq):
        """Vectorised stems as float arrays of shape ``(n, dim)``."""
        alpha = np.asarray(alpha, dtype=float)
        beta_sq = np.asarray(beta_sq, dtype=float)
        vs = np.empty(alpha.shape + (1 << self.level,))
        ds = np.empty_like(vs)
        for idx in np.ndindex(alpha.shape):
            v, d = self._stem(float(alpha[idx]), float(beta_sq[idx]))
            vs[idx] = v.as_array()
            ds[idx] = np.nan if d is None else d.as_array()
        return vs, ds

    def evaluate_batch(self, X):
        X = np.asarray(X, dtype=float)
        alpha = X[..., 0]
        im = X.copy()
        im[..., 0] = 0.0
        vs, ds = self.stem_batch(alpha, norm_arrays(im))
        return vs + mul_arrays(im, ds)

    def is_slice_preserving(self, sample_count=64, seed=0):
        rng = np.random.default_rng(seed)
        pts = _sample_region_points(self.domain, sample_count, rng)
        for a, b in pts:
            vs, ds = self.stem(a, b)
            if not vs.is_real(SLICE_PRESERVING_TOL):
                return False
            if ds is not None and not ds.is_real(SLICE_PRESERVING_TOL):
                return False
        return True

    # algebra sugar -------------------------------------------------------

    def __add__(self, other):
        return SumFunction(self, as_slice_function(other, self.level))

    def __radd__(self, other):
        return SumFunction(as_slice_function(other, self.level), self)

    def __neg__(self):
        return ScaledFunction(self, -1)

    def __sub__(self, other):
        return self + (-as_slice_function(other, self.level))

    def star(self, other):
        return slice_product(self, other)

    def conj(self):
        return slice_conjugate(self)

    def normal(self):
        return normal(self)


def _sample_region_points(domain, count, rng):
    pts = []
    regions = domain.regions
    for t in range(count):
        r = regions[t % len(regions)]
        a0, a1, b0, b1 = r.bbox()
        a0, a1 = max(a0, -3.0), min(a1, 3.0)
        b0, b1 = max(b0, 0.0), min(b1, 3.0)
        for _ in range(200):
            a, b = rng.uniform(a0, a1), rng.uniform(b0, b1)
            if domain.contains(a, b):
                pts.append((a, b))
                break
    return pts


def as_slice_function(value, level):
    if isinstance(value, SliceFunction):
        return value
    from .star_poly import StarPolynomial

    if isinstance(value, Element):
        return StarPolynomial([value])
    return StarPolynomial([Element.real(value, level)])


# ---------------------------------------------------------------------------
# function given by stem callables


def _beta_from_sq(beta_sq):
    if isinstance(beta_sq, Fraction):
        return exact_sqrt(beta_sq)
    return math.sqrt(beta_sq)


class StemFunction(SliceFunction):
    """Slice function defined by callables ``vs(alpha, beta)`` and ``ds(alpha, beta)``.

    ``ds`` is only consulted off the real axis unless ``real_ds`` is given.
    """

    def __init__(self, level, vs, ds, domain=None, real_ds=None, name=None):
        super().__init__(level, domain)
        self._vs = vs
        self._ds = ds
        self._real_ds = real_ds
        self.name = name or "stem"

    def _stem(self, alpha, beta_sq):
        beta = _beta_from_sq(beta_sq)
        vs = self._vs(alpha, beta)
        if beta_sq == 0:
            ds = self._real_ds(alpha) if self._real_ds is not None else None
        else:
            ds = self._ds(alpha, beta)
        return vs, ds

    def __repr__(self):
        return f"StemFunction({self.name})"


def unit_direction_function(J0):
    """``1 + (im(x)/|im(x)|) J0`` on the complement of the real axis.

    A slice regular function with ``N(f) = 0`` whose zero set is the half-slice
    through ``J0``.
    """
    level = J0.level
    one = Element.real(1, level)

    def vs(alpha, beta):
        return one

    def ds(alpha, beta):
        return J0 / beta

    return StemFunction(level, vs, ds, domain=DomainSpec.off_real(), name=f"1+(im/|im|)({J0})")


# ---------------------------------------------------------------------------
# sampled stems


class StemGrid(SliceFunction):
    """Stem samples on ``[a0, a1] x [b0, b1]`` with bilinear interpolation.

    ``vs`` and ``ds`` are float arrays of shape ``(n_alpha, n_beta, dim)``.
    When ``b0 == 0`` the ``ds`` row at ``beta = 0`` counts as a stored real-axis
    limit only if ``real_ds`` is true.
    """

    def __init__(self, rect, vs, ds, real_ds=False):
        vs = np.asarray(vs, dtype=float)
        ds = np.asarray(ds, dtype=float)
        if vs.shape != ds.shape or vs.ndim != 3:
            raise ValueError("vs and ds must share shape (n_alpha, n_beta, dim)")
        a0, a1, b0, b1 = (float(v) for v in rect)
        if b0 < 0 or a1 <= a0 or b1 <= b0:
            raise ValueError("rect must be [a0, a1] x [b0, b1] with 0 <= b0 < b1")
        from .cayley_dickson import level_of_dim

        super().__init__(level_of_dim(vs.shape[-1]), DomainSpec.rect(a0, a1, b0, b1))
        self.rect = (a0, a1, b0, b1)
        self.vs = vs
        self.ds = ds
        self.real_ds = real_ds and b0 == 0

    @classmethod
    def from_function(cls, f, rect, shape=(41, 41), real_ds=True):
        a0, a1, b0, b1 = rect
        na, nb = shape
        A = np.linspace(a0, a1, na)
        B = np.linspace(b0, b1, nb)
        AA, BB = np.meshgrid(A, B, indexing="ij")
        vs, ds = f.stem_batch(AA, BB * BB)
        has_real = real_ds and not np.isnan(ds[:, 0]).any()
        ds = np.nan_to_num(ds)
        return cls(rect, vs, ds, real_ds=has_real)

    def _locate(self, alpha, beta):
        a0, a1, b0, b1 = self.rect
        if not (a0 - 1e-12 <= alpha <= a1 + 1e-12 and b0 - 1e-12 <= beta <= b1 + 1e-12):
            raise OutOfDomain(f"({alpha}, {beta}) outside the sampled rectangle")
        na, nb = self.vs.shape[:2]
        u = (min(max(alpha, a0), a1) - a0) / (a1 - a0) * (na - 1)
        v = (min(max(beta, b0), b1) - b0) / (b1 - b0) * (nb - 1)
        i = min(int(u), na - 2)
        j = min(int(v), nb - 2)
        return i, j, u - i, v - j

    def _interp(self, arr, i, j, s, t):
        return ((1 - s) * (1 - t) * arr[i, j] + s * (1 - t) * arr[i + 1, j]
                + (1 - s) * t * arr[i, j + 1] + s * t * arr[i + 1, j + 1])

    def _stem(self, alpha, beta_sq):
        alpha = float(alpha)
        beta = math.sqrt(float(beta_sq))
        i, j, s, t = self._locate(alpha, beta)
        vs = Element.from_array(self._interp(self.vs, i, j, s, t))
        if beta == 0 and not self.real_ds:
            return vs, None
        return vs, Element.from_array(self._interp(self.ds, i, j, s, t))

    def to_json(self):
        from .cayley_dickson import LEVEL_NAMES

        name = LEVEL_NAMES[self.level]

        def enc(arr):
            return [[{"algebra": name, "coords": [float(c) for c in cell]} for cell in row] for row in arr]

        return {"kind": "stem", "rect": list(self.rect), "vs": enc(self.vs), "ds": enc(self.ds),
                "real_ds": bool(self.real_ds)}

    @classmethod
    def from_json(cls, data):
        def dec(rows):
            return np.array([[[float(c) for c in cell["coords"]] for cell in row] for row in rows])

        return cls(data["rect"], dec(data["vs"]), dec(data["ds"]), real_ds=data.get("real_ds", False))


# ---------------------------------------------------------------------------
# generic operations (stem formulas)


class SumFunction(SliceFunction):
    def __init__(self, f, g):
        super().__init__(f.level, f.domain.intersect(g.domain))
        self.f, self.g = f, g

    def _stem(self, alpha, beta_sq):
        vf, df = self.f._stem(alpha, beta_sq)
        vg, dg = self.g._stem(alpha, beta_sq)
        vf, vg = lift(vf, vg)
        ds = None
        if df is not None and dg is not None:
            df, dg = lift(df, dg)
            ds = df + dg
        return vf + vg, ds


class ScaledFunction(SliceFunction):
    def __init__(self, f, scalar):
        super().__init__(f.level, f.domain)
        self.f, self.scalar = f, scalar

    def _stem(self, alpha, beta_sq):
        v, d = self.f._stem(alpha, beta_sq)
        return v * self.scalar, None if d is None else d * self.scalar


class ConjugateFunction(SliceFunction):
    def __init__(self, f):
        super().__init__(f.level, f.domain)
        self.f = f

    def _stem(self, alpha, beta_sq):
        v, d = self.f._stem(alpha, beta_sq)
        return v.conj(), None if d is None else d.conj()


def _product_stem(vf, df, vg, dg, beta_sq):
    """Stem of a slice product from the stems of the factors."""
    if beta_sq == 0:
        vf, vg = lift(vf, vg)
        vs = vf * vg
        if df is None or dg is None:
            return vs, None
        vf, df, vg, dg = lift(vf, df, vg, dg)
        return vf * vg, vf * dg + df * vg
    vf, df, vg, dg = lift(vf, df, vg, dg)
    return vf * vg - (df * dg) * beta_sq, vf * dg + df * vg


class ProductFunction(SliceFunction):
    def __init__(self, f, g):
        super().__init__(f.level, f.domain.intersect(g.domain))
        self.f, self.g = f, g

    def _stem(self, alpha, beta_sq):
        vf, df = self.f._stem(alpha, beta_sq)
        vg, dg = self.g._stem(alpha, beta_sq)
        return _product_stem(vf, df, vg, dg, beta_sq)


def normal_stem(vs, ds, beta_sq):
    """Stem of ``N(f)``: ``(n(vs) - beta^2 n(ds), t(vs ds^c))``, both real."""
    level = vs.level
    if ds is None:
        if beta_sq != 0:
            raise RealPointDerivative("missing spherical derivative off the real axis")
        return Element.real(vs.norm(), level), None
    vs, ds = lift(vs, ds)
    v = vs.norm() - ds.norm() * beta_sq
    d = 2 * vs.dot(ds)  # t(a b^c) = 2 <a, b>
    return Element.real(v, level), Element.real(d, level)


class NormalFunction(SliceFunction):
    def __init__(self, f):
        super().__init__(f.level, f.domain)
        self.f = f

    def _stem(self, alpha, beta_sq):
        v, d = self.f._stem(alpha, beta_sq)
        return normal_stem(v, d, beta_sq)


def slice_product(f, g):
    """Slice (star) product, closed form whenever both factors are closed forms."""
    from .star_poly import SemiregularForm, StarPolynomial

    f = as_slice_function(f, getattr(g, "level", 0))
    g = as_slice_function(g, f.level)
    if f.level != g.level:
        raise AlgebraMismatch("factors live in different algebras")
    closed = (StarPolynomial, SemiregularForm)
    if isinstance(f, closed) and isinstance(g, closed):
        return f.star(g)
    return ProductFunction(f, g)


def slice_conjugate(f):
    from .star_poly import SemiregularForm, StarLaurent, StarPolynomial

    if isinstance(f, (StarPolynomial, SemiregularForm, StarLaurent)):
        return f.conj()
    return ConjugateFunction(f)


def normal(f):
    from .star_poly import SemiregularForm, StarPolynomial

    if isinstance(f, (StarPolynomial, SemiregularForm)):
        return f.normal()
    return NormalFunction(f)


def is_slice_preserving(f, sample_count=64, seed=0):
    return f.is_slice_preserving(sample_count=sample_count, seed=seed)


def spherical_value(f, q):
    return f.spherical_value(q)


def spherical_derivative(f, q):
    return f.spherical_derivative(q)


def evaluate(f, x):
    return f.evaluate(x)


# ---------------------------------------------------------------------------
# splitting into holomorphic components


@dataclass
class SplitResult:
    alphas: np.ndarray
    betas: np.ndarray
    components: np.ndarray  # complex, shape (n_components, n_alpha, n_beta)
    basis: list
    cr_residual: float


def split_components(f, J, grid):
    """Split ``f`` on the slice ``C_J`` along a splitting basis.

    ``grid = (a0, a1, b0, b1, n)`` describes an ``n x n`` lattice of points
    ``a + bJ`` (``b`` may be negative).  Each component ``f_n`` is returned as a
    complex array through ``a + bJ <-> a + ib``; ``cr_residual`` is the largest
    central-difference Cauchy-Riemann defect over interior nodes.
    """
    if not is_imaginary_unit(J):
        raise NotImaginaryUnit(f"{J} is not an imaginary unit")
    a0, a1, b0, b1, n = grid
    if n < 3:
        raise GridTooSmall("need at least a 3 x 3 grid")
    basis = splitting_basis(J)
    Jd = J.to_double()
    A = np.linspace(a0, a1, n)
    B = np.linspace(b0, b1, n)
    pts = np.array([[(Jd * float(b) + float(a)).as_array() for b in B] for a in A])
    vals = f.evaluate_batch(pts)
    m = len(basis) // 2
    comps = np.empty((m, n, n), dtype=complex)
    for c in range(m):
        Jn = basis[2 * c].as_array()
        JJn = basis[2 * c + 1].as_array()
        comps[c] = vals @ Jn + 1j * (vals @ JJn)
    ha, hb = A[1] - A[0], B[1] - B[0]
    da = (comps[:, 2:, 1:-1] - comps[:, :-2, 1:-1]) / (2 * ha)
    db = (comps[:, 1:-1, 2:] - comps[:, 1:-1, :-2]) / (2 * hb)
    residual = float(np.max(np.abs(0.5 * (da + 1j * db))))
    return SplitResult(A, B, comps, basis, residual)


def random_slice_point(rng, level, alpha_range=(-2, 2), beta_range=(0.1, 2)):
    """``alpha + beta J`` with a random imaginary unit ``J``."""
    J = random_unit(rng, level)
    return J * rng.uniform(*beta_range) + rng.uniform(*alpha_range)
