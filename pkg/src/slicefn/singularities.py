"""Singularities on spheres: distances, spherical Laurent coefficients, classification
and an image-density probe.

Contour integrals live in the slice through the centre ``y`` and are computed
with the trapezoidal rule on two small circles, one around ``y`` and one around
``y^c`` (a single circle when ``y`` is real).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import cKDTree

from .cayley_dickson import Element, mul_arrays, norm_arrays, random_unit, sphere_decompose
from .errors import (
    ContourThroughSingularity,
    NonConvergentWindow,
    NormalIdenticallyZero,
    PoleProximity,
    ProbeInconclusive,
)
from .star_poly import SemiregularForm, delta_poly

BOUNDED_SLOPE = -0.1
UNBOUNDED_SLOPE = -0.9
DEFAULT_RADII = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


# ---------------------------------------------------------------------------
# distances


def _same_slice(x, y, tol=1e-12):
    a, b = x.im().to_double(), y.im().to_double()
    na, nb = abs(a), abs(b)
    if na <= tol or nb <= tol:
        return True
    return abs(abs(a.dot(b)) - na * nb) <= tol * (1 + na * nb)


def sigma(x, y):
    """Distance adapted to the star-power expansion at ``y``."""
    if _same_slice(x, y):
        return abs(x.to_double() - y.to_double())
    return math.hypot(float(x.re) - float(y.re), abs(x.im()) + abs(y.im()))


def tau(x, y):
    if _same_slice(x, y):
        return abs(x.to_double() - y.to_double())
    return math.hypot(float(x.re) - float(y.re), abs(x.im()) - abs(y.im()))


def u_dist(x, y):
    """``sqrt(|Delta_y(x)|)``, zero exactly on the sphere of ``y``."""
    return math.sqrt(abs(delta_poly(y).evaluate(x)))


# ---------------------------------------------------------------------------
# slice geometry helpers


def _slice_unit(y):
    dec = sphere_decompose(y)
    return dec, dec.unit.to_double()


def _slice_points(J, z):
    """Elements ``Re z + Im z * J`` for a complex array ``z``."""
    Jd = J.as_array()
    pts = np.outer(z.imag, Jd)
    pts[:, 0] += z.real
    return pts


def _evaluate_on_slice(f, J, z):
    try:
        vals = f.evaluate_batch(_slice_points(J, z))
    except (PoleProximity, ZeroDivisionError) as exc:
        raise ContourThroughSingularity(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise ContourThroughSingularity("non-finite values on the contour")
    return vals


def _apply_complex(w, F, JF):
    """Left multiplication of ``F`` by ``Re w + Im w * J`` given ``JF = J F``."""
    return w.real[:, None] * F + w.imag[:, None] * JF


# ---------------------------------------------------------------------------
# spherical Laurent coefficients


@dataclass
class SphericalCoefficients:
    center: Element
    u: dict
    v: dict
    nodes: int
    radius: float
    converged: bool

    def to_json(self):
        return {"center": self.center.to_json(), "radius": self.radius, "nodes": self.nodes,
                "converged": self.converged,
                "u": {str(k): _arr_json(v) for k, v in sorted(self.u.items())},
                "v": {str(k): _arr_json(v) for k, v in sorted(self.v.items())}}

    def magnitude(self, k):
        return float(np.linalg.norm(self.u[k]) + np.linalg.norm(self.v[k]))

    def contour_delta(self):
        """Largest ``|Delta_y|`` on the contour circles."""
        beta = abs(self.center.im())
        r = self.radius
        return r * r if beta == 0 else r * (2 * beta + r)

    def scaled_magnitude(self, k):
        """Size of the ``k``-th term on the contour, which is what roundoff is relative to."""
        return self.magnitude(k) * self.contour_delta() ** k


def _arr_json(a):
    return [float(c) for c in a]


def _contour_coefficients(f, y, ks, radius, nodes):
    dec, J = _slice_unit(y)
    alpha, beta = float(dec.alpha), float(dec.beta)
    centres = [complex(alpha, beta)] if beta == 0 else [complex(alpha, beta), complex(alpha, -beta)]
    tr, nr = 2 * alpha, alpha * alpha + beta * beta
    theta = 2 * math.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    U = {k: 0.0 for k in ks}
    V = {k: 0.0 for k in ks}
    for c in centres:
        z = c + radius * e
        F = _evaluate_on_slice(f, J, z)
        JF = mul_arrays(np.broadcast_to(J.as_array(), F.shape), F)
        delta = z * z - tr * z + nr
        base = (radius / nodes) * e  # (2 pi J)^{-1} dz, trapezoidal weights
        for k in ks:
            w = base * delta ** (-k - 1)
            U[k] = U[k] + _apply_complex(w, F, JF).sum(axis=0)
            V[k] = V[k] + _apply_complex(w * (z - tr), F, JF).sum(axis=0)
    return U, V


def spherical_laurent_extract(f, y, k_window=(-4, 4), radius=None, nodes=512, max_nodes=8192,
                              tol=1e-9, strict=False):
    """Coefficients ``u_k, v_k`` with ``f = sum_k Delta_y^k (x u_k + v_k)`` near the sphere of ``y``.

    The node count doubles from ``nodes`` until successive coefficients agree
    to ``tol``.  With ``strict`` a window whose lowest coefficients do not decay
    raises ``NonConvergentWindow``.
    """
    dec, _ = _slice_unit(y)
    if radius is None:
        radius = 0.5 * float(dec.beta) if float(dec.beta) > 0 else 0.1
    ks = list(range(k_window[0], k_window[1] + 1))
    U, V = _contour_coefficients(f, y, ks, radius, nodes)
    converged = False
    while nodes < max_nodes:
        nodes *= 2
        U2, V2 = _contour_coefficients(f, y, ks, radius, nodes)
        change = max(float(np.abs(U2[k] - U[k]).max() + np.abs(V2[k] - V[k]).max()) for k in ks)
        U, V = U2, V2
        if change < tol:
            converged = True
            break
    out = SphericalCoefficients(y, U, V, nodes, radius, converged)
    if strict and len(ks) >= 2:
        lo = [out.magnitude(ks[0]), out.magnitude(ks[1])]
        if lo[0] > 1e-8 and lo[0] >= lo[1]:
            raise NonConvergentWindow("lowest coefficients of the window do not decay")
    return out


def spherical_laurent_reconstruct(coeffs, x):
    """``sum_k Delta_y^k(x) (x u_k + v_k)``."""
    D = delta_poly(coeffs.center).evaluate(x.to_double())
    x = x.to_double()
    total = Element.zero(x.level, exact=False)
    for k in coeffs.u:
        term = x * Element.from_array(coeffs.u[k]) + Element.from_array(coeffs.v[k])
        Dk = _element_power(D, k)
        total = total + Dk * term
    return total


def _element_power(a, k):
    if k < 0:
        return _element_power(a.inverse(), -k)
    out = Element.real(1.0, a.level)
    for _ in range(k):
        out = out * a
    return out


def spherical_order(coeffs, tol=1e-8):
    """``(order, finite)``: least even ``2 k0`` with all coefficients below ``-k0`` vanishing."""
    ks = sorted(coeffs.u)
    scale = max(coeffs.scaled_magnitude(k) for k in ks)
    neg = [k for k in ks if k < 0 and coeffs.scaled_magnitude(k) > tol * scale]
    if not neg:
        return 0, True
    k0 = -min(neg)
    if min(neg) == ks[0]:
        return k0 * 2, False
    return 2 * k0, True


# ---------------------------------------------------------------------------
# classification


@dataclass
class PointProbe:
    point: Element
    order: object  # int or None for "not found"
    slopes: list
    inconclusive_k: list = field(default_factory=list)

    def to_json(self):
        return {"point": self.point.to_json(),
                "order": self.order if self.order is not None else "Infinite",
                "slopes": self.slopes}


@dataclass
class SingularityReport:
    center: Element
    classification: str
    spherical_order: object  # int, or ("Infinite", bound)
    orders: dict
    probes: list
    coefficients: SphericalCoefficients = None
    k_max: int = 12
    exceptional: dict = field(default_factory=dict)

    @property
    def label(self):
        if self.classification == "Essential":
            return f"Essential(up to {self.k_max})"
        return self.classification

    def to_json(self):
        so = self.spherical_order
        return {"center": self.center.to_json(), "class": self.label,
                "spherical_order": so if isinstance(so, int) else {"Infinite": so[1]},
                "orders": {k: (v if v is not None else "Infinite") for k, v in self.orders.items()},
                "probes": [p.to_json() for p in self.probes],
                "coefficients": None if self.coefficients is None else self.coefficients.to_json(),
                "exceptional": self.exceptional, "k_max": self.k_max}


def _loglog_slope(radii, sups):
    lr = np.log(np.asarray(radii))
    ls = np.log(np.asarray(sups))
    if not np.all(np.isfinite(ls)):
        return -math.inf
    return float(np.polyfit(lr, ls, 1)[0])


def _growth_sups(f, y, point, k, radii, nodes):
    """``sup |(z - y)^k (z - y^c)^k f(z)|`` on circles around ``point`` in the slice of ``y``."""
    dec, J = _slice_unit(y)
    c_y = complex(float(dec.alpha), float(dec.beta))
    c_p = complex(float(point.re), float(point.to_double().dot(J)))
    theta = 2 * math.pi * (np.arange(nodes) + 0.5) / nodes
    sups = []
    for r in radii:
        z = c_p + r * np.exp(1j * theta)
        with np.errstate(over="ignore", invalid="ignore"):
            F = _evaluate_on_slice_loose(f, J, z)
            if float(dec.beta) == 0:
                factor = np.abs(z - c_y) ** k
            else:
                factor = np.abs(z - c_y) ** k * np.abs(z - c_y.conjugate()) ** k
            g = factor * np.sqrt(norm_arrays(F))
        sups.append(float(np.max(g)) if np.all(np.isfinite(g)) else math.inf)
    return sups


def _evaluate_on_slice_loose(f, J, z):
    try:
        return f.evaluate_batch(_slice_points(J, z))
    except (PoleProximity, ZeroDivisionError) as exc:
        raise ContourThroughSingularity(str(exc)) from exc


def _point_order(f, y, point, k_max, radii, nodes):
    slopes = []
    for k in range(k_max + 1):
        s = _loglog_slope(radii, _growth_sups(f, y, point, k, radii, nodes))
        slopes.append(s)
        if s > BOUNDED_SLOPE:
            return PointProbe(point, k, slopes)
        if s >= UNBOUNDED_SLOPE:
            raise ProbeInconclusive(
                f"growth slope {s:.3f} at k={k} near {point} is neither bounded nor unbounded")
    return PointProbe(point, None, slopes)


def classify_singularity(f, y, k_max=12, radii=DEFAULT_RADII, nodes=64, extract=True,
                         k_window=None):
    """Removable, pole or essential singularity of ``f`` on the sphere of ``y``."""
    y = y.to_double()
    dec = sphere_decompose(y)
    points = [y] if dec.degenerate else [y, y.conj()]
    probes = [_point_order(f, y, p, k_max, radii, nodes) for p in points]
    orders = {str(p.point): p.order for p in probes}
    finite = [p.order for p in probes if p.order is not None]
    if len(finite) < len(probes):
        cls = "Essential"
    elif all(o == 0 for o in finite):
        cls = "Removable"
    else:
        cls = "Pole"
    coeffs = None
    if extract:
        window = k_window or (-(k_max + 1), 2)
        coeffs = spherical_laurent_extract(f, y, window)
        so, so_finite = spherical_order(coeffs)
        sph = so if so_finite else ("Infinite", k_max)
    else:
        so_finite = cls != "Essential"
        sph = 2 * max(finite) if so_finite and finite else ("Infinite", k_max)
    # cross-check the two routes
    if dec.degenerate:
        expected = ("Infinite", k_max) if cls == "Essential" else None
    else:
        expected = ("Infinite", k_max) if cls == "Essential" else 2 * max(finite)
    if expected is not None:
        if isinstance(expected, tuple) != (not so_finite) or (so_finite and sph != expected):
            raise ProbeInconclusive(
                f"contour spherical order {sph} disagrees with point probes {orders}")
    exceptional = {}
    if cls == "Pole" and len(probes) == 2 and probes[0].order != probes[1].order:
        low = min(probes, key=lambda p: p.order)
        k = max(finite)
        sups = _growth_sups(f, y, low.point, k, radii, nodes)
        exceptional = {"point": low.point.to_json(), "order": low.order,
                       "g_power": k, "g_zero_order": int(round(_loglog_slope(radii, sups)))}
    return SingularityReport(y, cls, sph, orders, probes, coeffs, k_max, exceptional)


# ---------------------------------------------------------------------------
# semiregular arithmetic


def semiregular_mul(F, G):
    return F.star(G)


def semiregular_reciprocal(F):
    """``(q P^c, N(P))`` for ``F = (P, q)``."""
    if not isinstance(F, SemiregularForm):
        raise TypeError("expected a SemiregularForm")
    if F.num.normal().is_zero():
        raise NormalIdenticallyZero("the numerator has identically vanishing normal")
    return F.reciprocal()


# ---------------------------------------------------------------------------
# density of the image near an essential singularity


def _shell_samples(rng, centre, r_in, r_out, n):
    """Points of the upper half-plane at log-uniform distance from ``centre``."""
    r = np.exp(rng.uniform(math.log(r_in), math.log(r_out), n))
    th = rng.uniform(0, 2 * math.pi, n)
    z = centre + r * np.exp(1j * th)
    return z.real, np.abs(z.imag)


def density_probe(f, y, n_samples=10 ** 6, eps=0.15, n_targets=2000, target_center=None,
                  target_radius=1.0, shell=(0.1, 1.0), seed=0, batch=200_000):
    """Fraction of random targets within ``eps`` of the sampled image ``f(shell)``.

    Samples are drawn on a punctured shell around the sphere of ``y`` in random
    slices.  For slice-preserving ``f`` the image is circular, so the distance
    from a target ``t`` to it equals the planar distance from ``(Re t, |Im t|)``
    to the image of the half-plane samples and their conjugates; other
    functions use Euclidean distance in the whole algebra.
    """
    rng = np.random.default_rng(seed)
    level = f.level
    dim = 1 << level
    dec = sphere_decompose(y.to_double())
    centre = complex(float(dec.alpha), float(dec.beta))
    preserving = f.is_slice_preserving()
    chunks = []
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        a, b = _shell_samples(rng, centre, shell[0], shell[1], m)
        vs, ds = f.stem_batch(a, b * b)
        if preserving:
            w = vs[:, 0] + 1j * b * ds[:, 0]
            chunks.append(np.stack([w.real, np.abs(w.imag)], axis=1))
        else:
            J = np.array([random_unit(rng, level).as_array() for _ in range(min(m, 512))])
            J = J[rng.integers(0, len(J), m)]
            vals = vs + b[:, None] * mul_arrays(J, ds)
            chunks.append(vals)
        done += m
    image = np.concatenate(chunks)
    image = image[np.all(np.isfinite(image), axis=1)]
    tc = np.zeros(dim) if target_center is None else target_center.to_double().as_array()
    d = rng.standard_normal((n_targets, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    targets = tc + target_radius * d * rng.uniform(0, 1, n_targets)[:, None] ** (1.0 / dim)
    if preserving:
        q = np.stack([targets[:, 0], np.linalg.norm(targets[:, 1:], axis=1)], axis=1)
    else:
        q = targets
    dist, _ = cKDTree(image).query(q)
    coverage = float(np.mean(dist <= eps))
    return {"coverage": coverage, "eps": eps, "samples": int(n_samples), "targets": n_targets,
            "shell": list(shell), "slice_reduction": bool(preserving), "seed": seed}
