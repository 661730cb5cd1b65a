
import numpy as np
import pytest

from slicefn.cayley_dickson import Element, in_span, generated_subalgebra, random_element, random_unit
from slicefn.errors import DegenerateEpsilon, OutOfDomain
from slicefn.modulus_analysis import (
    half_slice_variance,
    local_extremum_probe,
    non_open_witness,
    open_image_epsilon,
    sphere_extrema,
    sphere_modulus_samples,
)
from slicefn.slice_rep import slice_product, unit_direction_function
from slicefn.star_poly import StarPolynomial, linear_factor

O = 3
one, i, j, k, l, li = (Element.unit(t, O) for t in range(6))
X = StarPolynomial.variable(O)


def bump_function():
    """``3i + x * (1 + (im x/|im x|) i)``: constant modulus 3 on the upper half-slice through i."""
    direction = unit_direction_function(i.to_double())
    return StarPolynomial([3 * i]).to_double() + slice_product(X.to_double(), direction), direction


def random_poly(rng, level, degree):
    return StarPolynomial([random_element(rng, level) for _ in range(degree + 1)], level)


def dense_sphere(level, rng, n=200_000):
    v = rng.standard_normal((n, (1 << level) - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.concatenate([np.zeros((n, 1)), v], axis=1)


class TestSphereExtrema:
    def test_linear_factor(self):
        res = sphere_extrema(X - i, j)
        assert not res.constant_modulus
        assert res.min_point == i and res.max_point == -i
        assert res.min_value == pytest.approx(0, abs=1e-12) and res.max_value == pytest.approx(2)

    def test_variable_is_constant(self):
        res = sphere_extrema(X, k)
        assert res.constant_modulus and res.max_value == res.min_value == pytest.approx(1)

    def test_real_point_rejected(self):
        with pytest.raises(OutOfDomain):
            sphere_extrema(X, 2 * one)

    @pytest.mark.parametrize("level", [2, 3])
    def test_formula_bounds_dense_grid(self, level):
        rng = np.random.default_rng(level)
        units = dense_sphere(level, rng)
        for _ in range(8):
            f = random_poly(rng, level, 3)
            y = random_unit(rng, level) * rng.uniform(0.2, 2) + rng.uniform(-1, 1)
            res = sphere_extrema(f, y)
            vals = sphere_modulus_samples(f, res.alpha, res.beta, units)
            assert vals.max() <= res.max_value + 1e-9
            assert vals.min() >= res.min_value - 1e-9
            assert abs(res.grid_max - res.max_value) < 1e-3
            assert abs(f.evaluate(res.max_point)) == pytest.approx(res.max_value, abs=1e-9)
            assert abs(f.evaluate(res.min_point)) == pytest.approx(res.min_value, abs=1e-9)
            assert res.algebra_membership_check
            vs, ds = f.stem(res.alpha, res.beta)
            basis = generated_subalgebra([vs, ds])
            assert in_span(res.max_point, basis) and in_span(res.min_point, basis)

    def test_zero_is_unique_minimiser(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            y = random_unit(rng, O) * 0.8 + 0.3
            f = linear_factor(y).star(random_poly(rng, O, 1))
            other = random_unit(rng, O) * 0.8 + 0.3
            res = sphere_extrema(f, other)
            assert res.min_point.isclose(y, 1e-9) and res.min_value < 1e-9
            units = dense_sphere(O, rng, 20000)
            vals = sphere_modulus_samples(f, res.alpha, res.beta, units)
            near = np.linalg.norm(units[:, 1:] * res.beta - y.im().as_array()[1:], axis=1) < 0.05
            assert vals[~near].min() > res.min_value


class TestHalfSliceMaximum:
    def test_modulus_identity(self):
        bump, direction = bump_function()
        rng = np.random.default_rng(0)
        for _ in range(1000):
            x = random_unit(rng, O) * rng.uniform(0.05, 3) + rng.uniform(-2, 2)
            lhs = bump.evaluate(x).norm() - 9
            rhs = (x.norm() - 3 * abs(x.im())) * direction.evaluate(x).norm()
            assert abs(lhs - rhs) < 1e-10

    def test_local_maximum_at_i(self):
        bump, _ = bump_function()
        res = local_extremum_probe(bump, i.to_double(), 0.3, seed=1)
        assert res["result"] == "IsLocalMax" and not res["constant"]
        assert res["value"] == pytest.approx(3)

    def test_local_minimum_outside(self):
        bump, _ = bump_function()
        res = local_extremum_probe(bump, 4 * i.to_double(), 0.5, seed=1)
        assert res["result"] == "IsLocalMin"

    def test_constant_on_half_slice(self):
        bump, direction = bump_function()
        alphas = np.linspace(-1, 1, 7)
        betas = np.linspace(0.1, 2, 7)
        assert half_slice_variance(bump, i, alphas, betas) < 1e-12
        assert half_slice_variance(bump, j, alphas, betas) > 1e-3

    def test_sphere_maximum_consistent(self):
        bump, direction = bump_function()
        for r in (0.5, 1.0, 2.0):
            res = sphere_extrema(bump, i.to_double() * r)
            top = res.max_point
            assert abs(bump.evaluate(top)) ** 2 - 9 == pytest.approx(
                (top.norm() - 3 * abs(top.im())) * direction.evaluate(top).norm(), abs=1e-9)
            assert abs(res.grid_max - res.max_value) < 1e-3


class TestProbes:
    def test_nonconstant_polynomial_is_neither(self):
        rng = np.random.default_rng(8)
        for n in range(5):
            f = random_poly(rng, O, 2)
            x0 = random_element(rng, O)
            assert local_extremum_probe(f, x0, 0.1, seed=n)["result"] == "Neither"

    def test_constant(self):
        res = local_extremum_probe(StarPolynomial([one + j]), li, 0.5)
        assert res["result"] == "IsLocalMax" and res["constant"]

    def test_square_near_one_is_open(self):
        res = open_image_epsilon((X * X).to_double(), one.to_double(), 0.5, n_targets=32)
        assert res["coverage"] == 1.0
        assert res["epsilon"] > 0.1

    def test_square_near_i_is_not_open(self):
        res = non_open_witness((X * X).to_double(), i.to_double(), 1.0, k, seed=2)
        assert res["holds"] and res["non_real_samples"] > 0
        # the square of any point of the ball misses the slice through k away from the real axis
        rng = np.random.default_rng(0)
        pts = i.to_double().as_array() + rng.uniform(-0.5, 0.5, (1000, 8))
        vals = (X * X).to_double().evaluate_batch(pts)
        assert np.all(np.abs(vals[:, 3]) < np.linalg.norm(vals[:, 1:], axis=1) + 1e-15)

    def test_constant_has_no_epsilon(self):
        with pytest.raises(DegenerateEpsilon):
            open_image_epsilon(StarPolynomial([one]).to_double(), one.to_double(), 0.5)
