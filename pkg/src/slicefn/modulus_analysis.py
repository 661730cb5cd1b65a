"""Modulus of slice functions on spheres and balls: extrema, local probes and openness."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import least_squares

from .cayley_dickson import Element, generated_subalgebra, in_span, mul_arrays, norm_arrays
from .errors import DegenerateEpsilon, OutOfDomain
from .slice_rep import point_stem_args

CONSTANT_TOL = 1e-10


@dataclass
class SphereExtrema:
    alpha: float
    beta: float
    constant_modulus: bool
    max_value: float
    min_value: float
    max_point: Element = None
    min_point: Element = None
    algebra_membership_check: bool = True
    grid_max: float = None
    grid_min: float = None
    grid_samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {"alpha": self.alpha, "beta": self.beta, "constant_modulus": self.constant_modulus,
               "max_value": self.max_value, "min_value": self.min_value,
               "algebra_membership_check": self.algebra_membership_check,
               "grid_max": self.grid_max, "grid_min": self.grid_min,
               "grid_samples": self.grid_samples}
        if self.max_point is not None:
            out["max_point"] = self.max_point.to_json()
            out["min_point"] = self.min_point.to_json()
        return out


def _unit_sphere_samples(rng, level, n):
    v = rng.standard_normal((n, (1 << level) - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.concatenate([np.zeros((n, 1)), v], axis=1)


def sphere_modulus_samples(f, alpha, beta, units):
    """``|f(alpha + beta J)|`` for an array of imaginary units (one per row)."""
    vs, ds = f._stem(float(alpha), float(beta) ** 2)
    vs, ds = vs.as_array(), ds.as_array()
    vals = vs + beta * mul_arrays(units, ds)
    return np.sqrt(norm_arrays(vals))


def sphere_extrema(f, y, grid=512, seed=0):
    """Extrema of ``|f|`` on the sphere through the non-real point ``y``.

    The closed form comes from ``v = vs f(y) f'_s(y)^c``; a grid search with
    ``grid`` random units and a great circle through the predicted maximiser
    corroborates it.
    """
    if y.is_real():
        raise OutOfDomain("the sphere of a real point is a single point")
    f._check_point(y)
    alpha, b2 = point_stem_args(y)
    alpha, beta = float(alpha), math.sqrt(float(b2))
    vs, ds = f._stem(alpha, beta * beta)
    vs, ds = vs.to_double(), ds.to_double()
    v = vs * ds.conj()
    im_v = v.im()
    rng = np.random.default_rng(seed)
    level = f.level
    units = _unit_sphere_samples(rng, level, grid)
    sampled = sphere_modulus_samples(f, alpha, beta, units)
    base = float(vs.norm()) + beta * beta * float(ds.norm())
    if abs(im_v) <= CONSTANT_TOL:
        m = math.sqrt(max(base, 0.0))
        return SphereExtrema(alpha, beta, True, m, m, grid_max=float(sampled.max()),
                             grid_min=float(sampled.min()), grid_samples=grid)
    I = im_v / abs(im_v)
    # |f(alpha + beta J)|^2 = n(vs) + beta^2 n(ds) + 2 beta <v, J>; evaluating the stem
    # at +-I avoids the cancellation of that expansion near a zero
    top = abs(vs + (I * beta) * ds)
    bottom = abs(vs - (I * beta) * ds)
    pmax = I * beta + alpha
    pmin = I * (-beta) + alpha
    sub = generated_subalgebra([vs, ds])
    member = in_span(pmax, sub) and in_span(pmin, sub)
    # great circle through I with a random phase
    K = Element.from_array(units[0])
    K = K - I * K.dot(I)
    K = K / abs(K)
    phase = rng.uniform(0, 2 * math.pi / grid)
    th = phase + np.arange(grid) * 2 * math.pi / grid
    circle = np.cos(th)[:, None] * I.as_array() + np.sin(th)[:, None] * K.as_array()
    on_circle = sphere_modulus_samples(f, alpha, beta, circle)
    allv = np.concatenate([sampled, on_circle])
    return SphereExtrema(alpha, beta, False, top, bottom, pmax, pmin, member,
                         float(allv.max()), float(allv.min()), 2 * grid)


# ---------------------------------------------------------------------------


def _ball_samples(rng, x0, radius, n):
    dim = x0.dim
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0, 1, n) ** (1.0 / dim)
    return x0.as_array() + d * r[:, None]


def local_extremum_probe(f, x0, radius, samples=4000, seed=0, tol=1e-12):
    """Monte-Carlo and axis comparison of ``|f|`` near ``x0``.

    Returns ``IsLocalMax``, ``IsLocalMin``, ``Neither`` or ``SaddleAmbiguous``
    (every violation is smaller than ``1e-9``).
    """
    rng = np.random.default_rng(seed)
    x0d = x0.to_double()
    pts = _ball_samples(rng, x0d, radius, samples)
    axes = []
    for t in range(x0.dim):
        for s in (radius, -radius, radius / 10, -radius / 10, radius / 100, -radius / 100):
            p = x0d.as_array().copy()
            p[t] += s * 0.999
            axes.append(p)
    pts = np.concatenate([pts, np.array(axes)])
    vals = np.sqrt(norm_arrays(f.evaluate_batch(pts)))
    f0 = abs(f.evaluate(x0d))
    excess = float(vals.max() - f0)
    deficit = float(f0 - vals.min())
    is_max = excess <= tol
    is_min = deficit <= tol
    if is_max:
        result = "IsLocalMax"
    elif is_min:
        result = "IsLocalMin"
    elif min(excess, deficit) < 1e-9:
        result = "SaddleAmbiguous"
    else:
        result = "Neither"
    return {"result": result, "constant": bool(is_max and is_min), "value": f0,
            "max_excess": excess, "min_deficit": deficit, "samples": int(len(pts)),
            "seed": seed}


# ---------------------------------------------------------------------------


def open_image_epsilon(f, x0, radius, n_boundary=4000, n_targets=64, starts=16, seed=0,
                       target_tol=1e-6):
    """Radius ``epsilon`` of a ball around ``f(x0)`` inside ``f(B(x0, radius))``, with a coverage check.

    ``epsilon`` is a third of the least boundary modulus of ``f - f(x0)``.
    Each random target in ``B(f(x0), epsilon)`` is attacked with ``starts``
    least-squares descents started inside the ball; coverage is the fraction
    reached to ``target_tol`` at an interior point.
    """
    rng = np.random.default_rng(seed)
    x0d = x0.to_double()
    c = x0d.as_array()
    fx0 = f.evaluate(x0d).as_array()
    dim = x0.dim
    d = rng.standard_normal((n_boundary, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    boundary = c + radius * d
    gmin = float(np.sqrt(norm_arrays(f.evaluate_batch(boundary) - fx0)).min())
    if gmin < 1e-9:
        raise DegenerateEpsilon(f"f - f(x0) nearly vanishes on the boundary (min {gmin:.3e})")
    eps = gmin / 3

    def residual(x, y):
        return f.evaluate_batch(x[None, :])[0] - y

    reached = 0
    worst = 0.0
    for _ in range(n_targets):
        u = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        y = fx0 + eps * rng.uniform(0, 1) ** (1.0 / dim) * u
        best = math.inf
        starts_pts = np.concatenate([c[None, :], _ball_samples(rng, x0d, radius, starts - 1)])
        for s in starts_pts:
            sol = least_squares(residual, s, args=(y,), bounds=(c - radius, c + radius),
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
            err = float(np.linalg.norm(sol.fun))
            inside = np.linalg.norm(sol.x - c) < radius
            if inside and err < best:
                best = err
            if best < target_tol:
                break
        worst = max(worst, best)
        reached += best < target_tol
    return {"epsilon": eps, "boundary_min": gmin, "coverage": reached / n_targets,
            "targets": n_targets, "starts": starts, "worst_residual": worst, "seed": seed}


def non_open_witness(f, x0, radius, slice_unit, n_samples=20000, seed=0, tol=1e-9):
    """Check that ``f(B(x0, radius))`` meets the slice of ``slice_unit`` only on the real axis.

    Returns the least distance to that slice over samples whose image is not
    real; the witness holds when it exceeds ``tol``.
    """
    rng = np.random.default_rng(seed)
    pts = _ball_samples(rng, x0.to_double(), radius, n_samples)
    vals = f.evaluate_batch(pts)
    im = vals.copy()
    im[:, 0] = 0.0
    im_size = np.sqrt(norm_arrays(im))
    K = slice_unit.to_double().as_array()
    off = im - (im @ K)[:, None] * K[None, :]
    dist = np.sqrt(norm_arrays(off))
    mask = im_size > tol
    min_dist = float(dist[mask].min()) if mask.any() else math.inf
    return {"holds": bool(min_dist > tol), "min_distance": min_dist,
            "non_real_samples": int(mask.sum()), "samples": n_samples, "seed": seed}


def half_slice_variance(f, J, alphas, betas):
    """Variance of ``|f|`` over half-slice samples ``alpha + beta J`` (``beta > 0``)."""
    Jd = J.to_double().as_array()
    pts = np.array([a * np.eye(J.dim)[0] + b * Jd for a in alphas for b in betas])
    return float(np.var(np.sqrt(norm_arrays(f.evaluate_batch(pts)))))
