import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import least_squares

from conftest import exact_elements, exact_polys
from slicefn.cayley_dickson import Element, random_rational, random_unit, sphere_decompose
from slicefn.errors import CaseMismatch
from slicefn.slice_rep import unit_direction_function
from slicefn.star_poly import StarPolynomial, delta_poly, linear_factor
from slicefn.zeros import (
    SphereZeroClass,
    camshaft_zero,
    case_four_derivative,
    classify_sphere_zeros,
    normal_zero_on_sphere,
    zero_scan,
)

O = 3
one, i, j, k, l, li = (Element.unit(t, O) for t in (0, 1, 2, 3, 4, 5))
X = StarPolynomial.variable(O)
affine = StarPolynomial([l, 2 * i])


def sphere_argmin(fg, alpha, beta, rng, samples=20000):
    """Dense random search over the sphere, then local refinement of ``|fg|``."""
    level = fg.level
    v = rng.standard_normal((samples, (1 << level) - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = np.concatenate([np.full((samples, 1), alpha), beta * v], axis=1)
    vals = np.linalg.norm(fg.evaluate_batch(pts), axis=1)
    start = v[np.argmin(vals)]

    def residual(w):
        w = w / np.linalg.norm(w)
        x = np.concatenate([[alpha], beta * w])
        return fg.evaluate_batch(x[None, :])[0]

    res = least_squares(residual, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    w = res.x / np.linalg.norm(res.x)
    return Element.from_array(np.concatenate([[alpha], beta * w])), float(np.linalg.norm(res.fun))


class TestClassify:
    def test_linear_factor_on_unit_sphere(self):
        res = classify_sphere_zeros(X - i, j)
        assert res.tag == "Point" and res.point == i

    def test_delta_is_whole(self):
        assert classify_sphere_zeros(delta_poly(i), k).tag == "Whole"

    def test_affine_zero_on_half_sphere(self):
        res = classify_sphere_zeros(affine, i / 2)
        assert res.tag == "Point" and res.point == li / 2
        assert affine.evaluate(li / 2).is_zero()

    def test_empty_sphere(self):
        assert classify_sphere_zeros(X - i, 2 * j).tag == "Empty"

    @given(exact_elements(), exact_polys(max_degree=2))
    def test_conjugate_shares_tag(self, y, q):
        f = linear_factor(y).star(q)
        for sph in (y, y * 2 + one):
            assert classify_sphere_zeros(f, sph).tag == classify_sphere_zeros(f.conj(), sph).tag

    @given(exact_elements(), exact_elements(), st.sampled_from([0, 1]))
    def test_product_sphere_closure(self, y, z, which):
        f = linear_factor(y)
        g = linear_factor(z) if which else StarPolynomial([one, z])
        fg = f.star(g)
        for sph in (y, z):
            has_f = classify_sphere_zeros(f, sph).tag != "Empty"
            has_g = classify_sphere_zeros(g, sph).tag != "Empty"
            has_fg = classify_sphere_zeros(fg, sph).tag != "Empty"
            assert has_fg == (has_f or has_g)

    @given(st.fractions(-3, 3, max_denominator=5), exact_polys(max_degree=2), exact_polys(max_degree=2))
    def test_real_zero_absorbs(self, r, q, g):
        x0 = Element.real(r, O)
        f = linear_factor(x0).star(q)
        assert f.star(g).evaluate(x0).is_zero()
        assert g.star(f).evaluate(x0).is_zero()


class TestNormalZero:
    def test_examples(self):
        y = one + 2 * j
        assert normal_zero_on_sphere(linear_factor(y), one + 2 * k)
        assert not normal_zero_on_sphere(linear_factor(y), 2 * one + j)
        f = unit_direction_function(i.to_double())
        assert normal_zero_on_sphere(f, (j * 0.5 + 0.3).to_double())


class TestCamshaft:
    def test_whole_factor(self):
        res = camshaft_zero(delta_poly(i), affine, j)
        assert res.tag == "Whole" and res.case == 1 and res.verified

    def test_two_linear_factors(self):
        res = camshaft_zero(X - i, X - j, k)
        assert res.tag == "Point" and res.point == i and res.verified

    def test_case_two_against_sphere_grid(self):
        f, g = X - i, X - (one + j)
        res = camshaft_zero(f, g, j)
        assert res.case == 2 and res.verified
        w, val = sphere_argmin(f.star(g).to_double(), 0.0, 1.0, np.random.default_rng(1))
        assert val < 1e-9
        assert w.isclose(res.point.to_double(), 1e-6)

    def test_supplied_classes_must_agree(self):
        wrong = SphereZeroClass("Empty", sphere_decompose(j))
        with pytest.raises(CaseMismatch):
            camshaft_zero(X - i, X - j, j, f_class=wrong)

    @pytest.mark.parametrize("seed", range(4))
    def test_random_cases_against_grid(self, seed):
        rng = np.random.default_rng(seed)
        alpha, beta = 0.5, 1.25
        y = random_unit(rng, O) * beta + alpha
        f = linear_factor(y.to_exact(1000))
        g = StarPolynomial([random_rational(rng, O), random_rational(rng, O), one])
        ysph = f.coeffs[0] * -1
        res = camshaft_zero(f, g, ysph)
        if res.tag != "Point":
            pytest.skip("random factor produced a non-point case")
        dec = sphere_decompose(ysph.to_double())
        w, val = sphere_argmin(f.star(g).to_double(), float(dec.alpha), float(dec.beta), rng)
        assert val < 1e-9
        assert w.isclose(res.point.to_double(), 1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_case_four_formulas_agree(self, seed):
        rng = np.random.default_rng(100 + seed)
        y = random_rational(rng, O, bound=2)
        dec = sphere_decompose(y)
        J = random_rational(rng, O, bound=2).im()
        # a second point on the same sphere: alpha + beta * J/|J| is irrational, so use
        # the reflection y -> u y u^{-1}, which keeps the sphere and stays rational
        u = J + one
        z = (u * y) * u.inverse()
        f, g = linear_factor(y), linear_factor(z)
        res = camshaft_zero(f, g, y)
        assert res.case == 4 and res.verified
        if res.tag == "Point":
            assert res.point.isclose(res.extra["case2_point"], 1e-9)
            assert res.point.isclose(res.extra["case3_point"], 1e-9)
        else:
            vs_f, df = f._stem(dec.alpha, dec.beta_sq)
            vs_g, dg = g._stem(dec.alpha, dec.beta_sq)
            assert case_four_derivative(y, z, df, dg).is_zero()


class TestScan:
    def test_product_of_linear_factors(self):
        hits = zero_scan((X - i).star(X - j), (-2, 2, 0, 2))
        assert len(hits) == 1
        assert hits[0].tag == "Point" and hits[0].point == i
        assert (hits[0].sphere.alpha, hits[0].sphere.beta) == (0, 1)

    def test_delta(self):
        hits = zero_scan(delta_poly(i), (-2, 2, 0, 2))
        assert [(hit.tag, hit.sphere.alpha, hit.sphere.beta) for hit in hits] == [("Whole", 0, 1)]

    def test_constant(self):
        assert zero_scan(StarPolynomial([one]), (-2, 2, 0, 2)) == []

    def test_irrational_radius_stays_exact(self):
        y = i + j + k
        hits = zero_scan(linear_factor(y), (-2, 2, 0, 2))
        assert len(hits) == 1 and hits[0].point == y

    def test_sampled_stem_scan(self):
        from slicefn.slice_rep import StemGrid

        f = (X - i).to_double()
        grid = StemGrid.from_function(f, (-1, 1, 0, 2), shape=(81, 81))
        hits = zero_scan(grid, (-1, 1, 0, 2), grid_density=41)
        assert any(hit.tag == "Point" and hit.point.isclose(i.to_double(), 1e-6) for hit in hits)

    def test_half_slice(self):
        f = unit_direction_function(i.to_double())
        hits = zero_scan(f, (-1, 1, 0.1, 1), grid_density=9)
        assert hits[0].tag == "HalfSlice" and hits[0].point.isclose(i.to_double(), 1e-9)

    def test_real_zero(self):
        hits = zero_scan(X - 2 * one, (-3, 3, 0, 1))
        assert len(hits) == 1 and hits[0].tag == "Point" and hits[0].point == 2 * one
