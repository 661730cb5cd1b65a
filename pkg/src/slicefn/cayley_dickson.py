"""Arithmetic in R, C, H and O generated by the Cayley-Dickson doubling.

Every level doubles the previous algebra as ``x = a + l*b`` with

    (a + l b)(c + l d) = a c - d b^c + l (a^c d + c b),   (a + l b)^c = a^c - l b.

The canonical bases are read off the recursion rather than typed in:
quaternion units are ``1, i, j, k`` with ``k = i j`` and the octonion units are
``e_{4+t} = l e_t``, so ``e5 = l i``, ``e6 = l j``, ``e7 = l k``.

Two numeric modes share one code path: exact (``fractions.Fraction``) and
double (``float``).  Elements of different modes never multiply silently.
"""

from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass
import math
import numbers

import numpy as np

from .errors import AlgebraMismatch, ModeMismatch, NotImaginaryUnit, ZeroNotInvertible

LEVEL_NAMES = {0: "R", 1: "C", 2: "H", 3: "O"}
NAME_LEVELS = {v: k for k, v in LEVEL_NAMES.items()}
UNIT_NAMES = ("1", "i", "j", "k", "l", "li", "lj", "lk")

ZERO_TOL = 1e-12  # absolute, on the norm
UNIT_TOL = 1e-9


# ---------------------------------------------------------------------------
# multiplication tables


def _raw_conj(x):
    return [x[0]] + [-c for c in x[1:]]


def _raw_mul(x, y):
    n = len(x)
    if n == 1:
        return [x[0] * y[0]]
    h = n // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    first = [p - q for p, q in zip(_raw_mul(a, c), _raw_mul(d, _raw_conj(b)))]
    second = [p + q for p, q in zip(_raw_mul(_raw_conj(a), d), _raw_mul(c, b))]
    return first + second


@lru_cache(maxsize=None)
def _canonical_raw_basis(level):
    """Canonical basis vectors expressed in raw recursive coordinates."""
    if level == 0:
        return ((1,),)
    lower = [list(v) + [0] * len(v) for v in _canonical_raw_basis(level - 1)]
    h = len(lower)
    u = [0] * (2 * h)
    u[h] = 1
    # H doubles C on the right (so that i j = k); O doubles H on the left (l i).
    if level == 2:
        upper = [_raw_mul(e, u) for e in lower]
    else:
        upper = [_raw_mul(u, e) for e in lower]
    return tuple(tuple(v) for v in lower + upper)


@lru_cache(maxsize=None)
def multiplication_table(level):
    """Return ``(index, sign)`` integer arrays with ``e_a e_b = sign[a,b] e_index[a,b]``."""
    basis = _canonical_raw_basis(level)
    n = len(basis)
    # each canonical vector is +- one raw basis vector
    raw_to_canon = {}
    for a, v in enumerate(basis):
        (pos,) = [p for p, c in enumerate(v) if c != 0]
        raw_to_canon[pos] = (a, v[pos])
    index = np.zeros((n, n), dtype=np.int64)
    sign = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            prod = _raw_mul(list(basis[a]), list(basis[b]))
            (pos,) = [p for p, c in enumerate(prod) if c != 0]
            canon, s = raw_to_canon[pos]
            index[a, b] = canon
            sign[a, b] = prod[pos] * s
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


@lru_cache(maxsize=None)
def structure_tensor(level):
    """``T[a, b, k]`` with ``e_a e_b = sum_k T[a, b, k] e_k``."""
    index, sign = multiplication_table(level)
    n = 1 << level
    T = np.zeros((n, n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            T[a, b, index[a, b]] = sign[a, b]
    T.setflags(write=False)
    return T


@lru_cache(maxsize=None)
def _sparse_terms(level):
    index, sign = multiplication_table(level)
    n = 1 << level
    return tuple((a, b, int(index[a, b]), int(sign[a, b])) for a in range(n) for b in range(n))


def level_of_dim(dim):
    level = dim.bit_length() - 1
    if dim < 1 or (1 << level) != dim or level > 3:
        raise ValueError(f"dimension {dim} is not 1, 2, 4 or 8")
    return level


# ---------------------------------------------------------------------------
# batch kernels on coordinate arrays of shape (..., 2**level)


def mul_arrays(a, b):
    """Product of coordinate arrays, broadcasting over leading axes.

    Works for float, integer and object (exact integer or Fraction) dtypes.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[-1]
    level = level_of_dim(n)
    if b.shape[-1] != n:
        raise AlgebraMismatch("coordinate arrays of different algebras")
    T = structure_tensor(level).reshape(n, n * n)
    if a.dtype == object or b.dtype == object:
        T = T.astype(object)
    left = (a @ T).reshape(a.shape[:-1] + (n, n))
    return np.einsum("...b,...bk->...k", b, left)


def conj_arrays(a):
    out = -np.asarray(a)
    out[..., 0] = -out[..., 0]
    return out


def norm_arrays(a):
    a = np.asarray(a)
    return (a * a).sum(axis=-1)


def inverse_arrays(a):
    return conj_arrays(a) / norm_arrays(a)[..., None]


def associator_arrays(a, b, c):
    return mul_arrays(mul_arrays(a, b), c) - mul_arrays(a, mul_arrays(b, c))


# ---------------------------------------------------------------------------
# scalar elements


def _coerce_coords(coords):
    coords = list(coords)
    if any(isinstance(c, (float, np.floating)) for c in coords):
        return tuple(float(c) for c in coords), False
    out = []
    for c in coords:
        if isinstance(c, (int, np.integer)):
            out.append(Fraction(int(c)))
        elif isinstance(c, Fraction):
            out.append(c)
        elif isinstance(c, numbers.Rational):
            out.append(Fraction(c.numerator, c.denominator))
        elif isinstance(c, str):
            out.append(Fraction(c))
        else:
            raise TypeError(f"unsupported coordinate {c!r}")
    return tuple(out), True


class Element:
    """An element of R, C, H or O as a coordinate vector in the canonical basis."""

    __slots__ = ("coords", "level", "exact")

    def __init__(self, coords, level=None):
        coords, exact = _coerce_coords(coords)
        lvl = level_of_dim(len(coords))
        if level is not None and level != lvl:
            raise AlgebraMismatch(f"expected {1 << level} coordinates, got {len(coords)}")
        self.coords = coords
        self.level = lvl
        self.exact = exact

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, level, exact=True):
        z = Fraction(0) if exact else 0.0
        return cls([z] * (1 << level))

    @classmethod
    def real(cls, value, level):
        c = [value] + [0.0 if isinstance(value, float) else 0] * ((1 << level) - 1)
        return cls(c)

    @classmethod
    def unit(cls, index, level, exact=True):
        if not 0 <= index < (1 << level):
            raise AlgebraMismatch(f"unit e{index} does not exist at level {level}")
        c = [0] * (1 << level)
        c[index] = 1
        e = cls(c)
        return e if exact else e.to_double()

    @classmethod
    def from_array(cls, arr):
        return cls([float(v) for v in arr])

    @property
    def dim(self):
        return 1 << self.level

    @property
    def algebra(self):
        return LEVEL_NAMES[self.level]

    def to_double(self):
        if not self.exact:
            return self
        return Element([float(c) for c in self.coords])

    def to_exact(self, max_denominator=None):
        if self.exact:
            return self
        if max_denominator is None:
            return Element([Fraction(c) for c in self.coords])
        return Element([Fraction(c).limit_denominator(max_denominator) for c in self.coords])

    def as_array(self):
        return np.array([float(c) for c in self.coords])

    def embed(self, level):
        """Include into a higher level of the doubling tower."""
        if level < self.level:
            raise AlgebraMismatch("cannot embed into a smaller algebra")
        z = Fraction(0) if self.exact else 0.0
        return Element(list(self.coords) + [z] * ((1 << level) - self.dim))

    # arithmetic ------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, Element):
            raise TypeError(f"expected Element, got {type(other).__name__}")
        if other.level != self.level:
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")
        if other.exact != self.exact:
            raise ModeMismatch("cannot mix exact and double elements")

    def _scalar(self, s):
        if isinstance(s, (float, np.floating)):
            return self.to_double(), float(s)
        if isinstance(s, (int, np.integer)):
            return self, int(s)
        if isinstance(s, numbers.Rational):
            return self, (Fraction(s.numerator, s.denominator) if self.exact else float(s))
        raise TypeError(f"unsupported scalar {s!r}")

    def __add__(self, other):
        if isinstance(other, numbers.Real):
            other = Element.real(other, self.level)
            if other.exact != self.exact:
                return self.to_double() + other.to_double()
        self._check(other)
        return Element([p + q for p, q in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Element([-c for c in self.coords])

    def __mul__(self, other):
        if isinstance(other, Element):
            return mul(self, other)
        if isinstance(other, numbers.Real):
            el, s = self._scalar(other)
            return Element([c * s for c in el.coords])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Real):
            if other == 0:
                raise ZeroNotInvertible("division by zero scalar")
            if isinstance(other, numbers.Rational) and self.exact:
                return Element([c / Fraction(other) for c in self.coords])
            return Element([c / float(other) for c in self.to_double().coords])
        if isinstance(other, Element):
            return self * inverse(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, numbers.Real):
            return self.coords[0] == other and all(c == 0 for c in self.coords[1:])
        if not isinstance(other, Element):
            return NotImplemented
        return self.level == other.level and self.coords == other.coords

    def __hash__(self):
        return hash((self.level, self.coords))

    def __abs__(self):
        return math.sqrt(float(norm(self)))

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return self.dim

    # algebra --------------------------------------------------------------

    def conj(self):
        return conj(self)

    def trace(self):
        return trace(self)

    def norm(self):
        return norm(self)

    def inverse(self):
        return inverse(self)

    @property
    def re(self):
        return self.coords[0]

    def im(self):
        z = Fraction(0) if self.exact else 0.0
        return Element((z,) + self.coords[1:])

    def is_real(self, tol=0.0):
        if self.exact or tol == 0:
            return all(c == 0 for c in self.coords[1:])
        return math.sqrt(sum(c * c for c in self.coords[1:])) <= tol

    def is_zero(self, tol=0.0):
        if self.exact or tol == 0:
            return all(c == 0 for c in self.coords)
        return float(norm(self)) <= tol * tol

    def isclose(self, other, tol=1e-10):
        if isinstance(other, numbers.Real):
            other = Element.real(other, self.level)
        if other.level != self.level:
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")
        return max(abs(float(p) - float(q)) for p, q in zip(self.coords, other.coords)) <= tol

    def dot(self, other):
        """Euclidean scalar product, equal to t(x y^c)/2."""
        if other.level != self.level:
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")
        if self.exact != other.exact:
            return sum(float(p) * float(q) for p, q in zip(self.coords, other.coords))
        return sum(p * q for p, q in zip(self.coords, other.coords))

    # display ----------------------------------------------------------------

    def __repr__(self):
        return f"Element({self.algebra}: {self})"

    def __str__(self):
        return format_element(self)

    def to_json(self):
        if self.exact:
            coords = [str(c) for c in self.coords]
        else:
            coords = [float(c) for c in self.coords]
        return {"algebra": self.algebra, "coords": coords}

    @classmethod
    def from_json(cls, data):
        level = NAME_LEVELS[data["algebra"]]
        coords = []
        for c in data["coords"]:
            coords.append(Fraction(c) if isinstance(c, str) else c)
        return cls(coords, level)


def _fmt_scalar(c):
    if isinstance(c, Fraction):
        return str(c)
    return repr(float(c))


def format_element(x):
    """Render in the CLI expression syntax, e.g. ``-3/5*j + 4/5*li``."""
    parts = []
    for idx, c in enumerate(x.coords):
        if c == 0:
            continue
        neg = c < 0
        mag = _fmt_scalar(-c if neg else c)
        if idx == 0:
            term = mag
        elif mag in ("1", "1.0"):
            term = UNIT_NAMES[idx]
        else:
            term = f"{mag}*{UNIT_NAMES[idx]}"
        if not parts:
            parts.append(("-" if neg else "") + term)
        else:
            parts.append(("- " if neg else "+ ") + term)
    return " ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# module-level operations


def mul(a, b):
    a._check(b)
    if a.exact:
        out = [Fraction(0)] * a.dim
        ca, cb = a.coords, b.coords
        for i, j, k, s in _sparse_terms(a.level):
            x, y = ca[i], cb[j]
            if x and y:
                out[k] += s * x * y
        return Element(out)
    return Element.from_array(mul_arrays(np.array(a.coords), np.array(b.coords)))


def conj(a):
    return Element((a.coords[0],) + tuple(-c for c in a.coords[1:]))


def trace(a):
    return 2 * a.coords[0]


def norm(a):
    return sum(c * c for c in a.coords)


def inverse(a, tol=ZERO_TOL):
    n = norm(a)
    if n == 0 or (not a.exact and n < tol):
        raise ZeroNotInvertible(f"{a} is not invertible")
    return Element([c / n for c in conj(a).coords])


def associator(a, b, c):
    return (a * b) * c - a * (b * c)


def commutator(a, b):
    return a * b - b * a


def is_imaginary_unit(a, tol=UNIT_TOL):
    if a.exact:
        return a.coords[0] == 0 and norm(a) == 1
    return abs(float(trace(a))) <= tol and abs(float(norm(a)) - 1.0) <= tol


def exact_sqrt(q):
    """Square root of a non-negative rational, exact when it is a perfect square."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative radicand")
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return math.sqrt(q)


@dataclass(frozen=True)
class SphereDecomposition:
    """``x = alpha + beta*unit`` with ``beta >= 0``; ``unit`` is e1 when x is real."""

    alpha: object
    beta: object
    unit: Element
    degenerate: bool
    exact_beta_sq: object = None  # kept when beta is irrational but beta^2 is rational

    @property
    def beta_sq(self):
        if self.exact_beta_sq is not None:
            return self.exact_beta_sq
        return self.beta * self.beta

    def point(self, unit=None):
        """The point ``alpha + beta*unit`` of the sphere."""
        unit = self.unit if unit is None else unit
        u = unit if (unit.exact and isinstance(self.beta, Fraction)) else unit.to_double()
        return u * self.beta + self.alpha

    def conj_point(self):
        return self.point(-self.unit)


def sphere_decompose(x):
    alpha = x.coords[0]
    im = x.im()
    b2 = norm(im)
    if b2 == 0:
        z = Fraction(0) if x.exact else 0.0
        return SphereDecomposition(alpha, z, Element.unit(1, max(x.level, 1), exact=x.exact)
                                   if x.level >= 1 else x, True)
    beta = exact_sqrt(b2) if x.exact else math.sqrt(b2)
    if isinstance(beta, float):
        unit = im.to_double() / beta
    else:
        unit = im / beta
    return SphereDecomposition(alpha, beta, unit, False, b2 if x.exact else None)


def splitting_basis(J, tol=1e-8):
    """Orthonormal ``[1, J, J1, J J1, J2, J J2, J3, J J3]`` (truncated below O)."""
    if J.level == 0 or not is_imaginary_unit(J):
        raise NotImaginaryUnit(f"{J} is not an imaginary unit")
    J = J.to_double()
    level = J.level
    one = Element.unit(0, level, exact=False)
    basis = [one, J]
    seeds = [Element.unit(t, level, exact=False) for t in range(1 << level)]
    for seed in seeds:
        if len(basis) == J.dim:
            break
        c = seed
        for b in basis:
            c = c - b * c.dot(b)
        nc = abs(c)
        if nc <= tol:
            continue
        c = c / nc
        basis.extend([c, J * c])
    return basis


def generated_subalgebra(elements, tol=1e-10):
    """Orthonormal basis of the subalgebra generated by ``elements`` (double mode)."""
    elements = [e.to_double() for e in elements]
    level = elements[0].level
    basis = []

    def add(v):
        for b in basis:
            v = v - b * v.dot(b)
        nv = abs(v)
        if nv > tol:
            basis.append(v / nv)
            return True
        return False

    add(Element.unit(0, level, exact=False))
    for e in elements:
        add(e)
    grew = True
    while grew and len(basis) < (1 << level):
        grew = False
        current = list(basis)
        for p in current:
            for q in current:
                if add(p * q):
                    grew = True
    return basis


def in_span(x, basis, tol=1e-10):
    x = x.to_double()
    r = x
    for b in basis:
        r = r - b * x.dot(b)
    return abs(r) <= tol


def random_element(rng, level, scale=1.0):
    return Element.from_array(rng.uniform(-scale, scale, size=1 << level))


def random_unit(rng, level):
    v = rng.standard_normal((1 << level) - 1)
    v /= np.linalg.norm(v)
    return Element.from_array(np.concatenate([[0.0], v]))


def random_rational(rng, level, bound=5, denom=4):
    nums = rng.integers(-bound * denom, bound * denom + 1, size=1 << level)
    dens = rng.integers(1, denom + 1, size=1 << level)
    return Element([Fraction(int(p), int(q)) for p, q in zip(nums, dens)])


def phi_J(z, J):
    """The embedding C -> C_J, ``a + ib -> a + bJ``."""
    return J * z.imag + z.real
