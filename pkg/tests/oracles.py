"""Reference implementations written independently of the package.

The octonion product here follows the doubling rule
``(a, b)(c, d) = (a c - d b^c, a^c d + c b)`` on nested halves, evaluated with
plain Python numbers; the quaternion product is Hamilton's table.
"""

import cmath
from fractions import Fraction


def _conj(x):
    return [x[0]] + [-c for c in x[1:]]


def _add(x, y):
    return [a + b for a, b in zip(x, y)]


def _sub(x, y):
    return [a - b for a, b in zip(x, y)]


def cd_mul(x, y):
    """Product of coordinate lists of length 1, 2, 4 or 8 by recursive doubling."""
    n = len(x)
    if n == 1:
        return [x[0] * y[0]]
    h = n // 2
    a, b = x[:h], x[h:]
    c, d = y[:h], y[h:]
    first = _sub(cd_mul(a, c), cd_mul(d, _conj(b)))
    second = _add(cd_mul(_conj(a), d), cd_mul(c, b))
    return first + second


def _to_recursive(x):
    # plain doubling at the quaternion level produces j*i = -k as its fourth
    # basis vector; the package uses k = i*j, so k and l*k flip sign
    x = list(x)
    for t in (3, 7):
        if t < len(x):
            x[t] = -x[t]
    return x


def oracle_mul(x, y):
    """Product in the package basis (``ij = k``, ``e_{4+t} = l e_t``)."""
    if len(x) < 4:
        return cd_mul(list(x), list(y))
    return _to_recursive(cd_mul(_to_recursive(x), _to_recursive(y)))


def hamilton(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return [a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2]


def cd_inverse(x):
    n = sum(c * c for c in x)
    return [c / n for c in _conj(x)]


def poly_convolve(p, q, mul=oracle_mul):
    """Coefficient convolution of lists of coordinate lists, trailing zeros dropped."""
    if not p or not q:
        return []
    dim = len(p[0])
    out = [[Fraction(0)] * dim for _ in range(len(p) + len(q) - 1)]
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = _add(out[i + j], mul(a, b))
    while out and not any(out[-1]):
        out.pop()
    return out


def horner_right(coeffs, x, mul=oracle_mul):
    """``sum x^n a_n`` evaluated as ordinary powers times right coefficients (valid in C_J)."""
    dim = len(x)
    power = [1] + [0] * (dim - 1)
    total = [0] * dim
    for a in coeffs:
        total = _add(total, mul(power, a))
        power = mul(power, x)
    return total


def complex_exp_inv_series(z, terms=40):
    return sum(z ** (-n) / _fact(n) for n in range(terms + 1)), cmath.exp(1 / z)


def _fact(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out
