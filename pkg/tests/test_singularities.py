import numpy as np
import pytest
from hypothesis import given

from conftest import slice_points
from slicefn.cayley_dickson import Element, random_element, random_unit
from slicefn.errors import NormalIdenticallyZero
from slicefn.reciprocal import star_reciprocal
from slicefn.singularities import (
    classify_singularity,
    density_probe,
    semiregular_mul,
    semiregular_reciprocal,
    sigma,
    spherical_laurent_extract,
    spherical_laurent_reconstruct,
    spherical_order,
    tau,
    u_dist,
)
from slicefn.slice_rep import unit_direction_function
from slicefn.star_poly import SemiregularForm, StarPolynomial, delta_poly, linear_factor, truncated_exp_inverse

O = 3
one, i, j, k, l = (Element.unit(t, O) for t in range(5))
X = StarPolynomial.variable(O)
ONE = StarPolynomial([one])


def pole_at(y, n=1):
    """``(x - y)^{-n}`` as a quotient form."""
    return SemiregularForm(ONE, ONE).star(
        SemiregularForm(linear_factor(y), ONE).reciprocal()) if n == 1 else \
        pole_at(y, 1).star(pole_at(y, n - 1))


def random_poly(rng, level, degree):
    return StarPolynomial([random_element(rng, level) for _ in range(degree + 1)], level)


def coeff(c, key, n):
    return Element.from_array(getattr(c, key)[n])


class TestDistances:
    def test_examples(self):
        assert sigma(i, 2 * i) == pytest.approx(1)
        assert sigma(i, j) == pytest.approx(2)
        assert tau(i, j) == pytest.approx(0)
        assert u_dist(j, i) == 0

    @given(slice_points(), slice_points())
    def test_branch_consistency(self, x, y):
        assert sigma(x, y) >= tau(x, y) - 1e-12
        same = y.re + x.im() * (abs(y.im()) / abs(x.im()))
        assert sigma(x, same) == pytest.approx(abs(x - same))
        assert tau(x, same) == pytest.approx(abs(x - same))

    @given(slice_points(), slice_points(), slice_points())
    def test_u_is_circular(self, x, y, other):
        on_sphere = y.re + other.im() * (abs(y.im()) / abs(other.im()))
        # squares, since the square root amplifies roundoff near zero
        d = u_dist(x, y) ** 2
        assert u_dist(x.conj(), y) ** 2 == pytest.approx(d, abs=1e-9)
        assert u_dist(x, on_sphere) ** 2 == pytest.approx(d, abs=1e-9)
        assert u_dist(on_sphere, y) ** 2 == pytest.approx(0, abs=1e-9)


class TestExtraction:
    def test_simple_pole(self):
        c = spherical_laurent_extract(pole_at(i), i)
        assert coeff(c, "u", -1).isclose(one.to_double(), 1e-8)
        assert coeff(c, "v", -1).isclose(i.to_double(), 1e-8)
        for n in c.u:
            if n != -1:
                assert c.magnitude(n) < 1e-8

    def test_polynomial_has_no_principal_part(self):
        rng = np.random.default_rng(0)
        f = random_poly(rng, O, 4)
        c = spherical_laurent_extract(f, random_unit(rng, O) * 0.7 + 0.2)
        assert all(c.magnitude(n) < 1e-8 for n in c.u if n < 0)
        assert spherical_order(c) == (0, True)

    def test_inverse_delta(self):
        f = SemiregularForm(ONE, delta_poly(i))
        c = spherical_laurent_extract(f, i)
        assert np.linalg.norm(c.u[-1]) < 1e-8
        assert coeff(c, "v", -1).isclose(one.to_double(), 1e-8)

    @pytest.mark.parametrize("seed", range(4))
    def test_reconstruction_on_annulus(self, seed):
        rng = np.random.default_rng(seed)
        m = 1 + seed % 2
        f = SemiregularForm(random_poly(rng, O, 3), delta_poly(i).star(delta_poly(i)) if m == 2 else delta_poly(i))
        c = spherical_laurent_extract(f, i, k_window=(-4, 30))
        worst = 0.0
        for _ in range(20):
            J = random_unit(rng, O)
            r = rng.uniform(0.15, 0.35)
            th = rng.uniform(0, 2 * np.pi)
            x = J * (1 + r * np.sin(th)) + r * np.cos(th)
            worst = max(worst, abs(spherical_laurent_reconstruct(c, x) - f.evaluate(x)))
        assert worst < 1e-6

    def test_contour_radius_invariance(self):
        rng = np.random.default_rng(9)
        f = SemiregularForm(random_poly(rng, O, 3), delta_poly(i).star(delta_poly(i)))
        a = spherical_laurent_extract(f, i, radius=0.5)
        b = spherical_laurent_extract(f, i, radius=0.25)
        for n in a.u:
            assert np.allclose(a.u[n], b.u[n], atol=1e-7) and np.allclose(a.v[n], b.v[n], atol=1e-7)


class TestClassify:
    def test_simple_pole(self):
        rep = classify_singularity(pole_at(i), i)
        assert rep.label == "Pole" and rep.spherical_order == 2
        orders = {tuple(p.point.as_array()): p.order for p in rep.probes}
        assert orders[tuple(i.to_double().as_array())] == 1
        assert orders[tuple((-i).to_double().as_array())] == 0

    def test_removable(self):
        f = SemiregularForm(delta_poly(i), delta_poly(i))
        rep = classify_singularity(f, i)
        assert rep.label == "Removable" and rep.spherical_order == 0
        assert all(p.order == 0 for p in rep.probes)

    def test_truncated_exponential(self):
        rep = classify_singularity(truncated_exp_inverse(O), Element.zero(O))
        assert rep.label == "Essential(up to 12)"
        assert rep.spherical_order == ("Infinite", 12)

    @pytest.mark.parametrize("seed", range(6))
    def test_trichotomy(self, seed):
        rng = np.random.default_rng(seed)
        y = random_unit(rng, O) * rng.uniform(0.5, 1.5) + rng.uniform(-1, 1)
        n = int(rng.integers(0, 3))
        f = SemiregularForm(random_poly(rng, O, 2), ONE)
        for _ in range(n):
            f = f.star(pole_at(y.to_exact(64)))
        rep = classify_singularity(f, y.to_exact(64))
        so = rep.spherical_order
        point_orders = [p.order for p in rep.probes]
        assert not (so == 0 and any(o != 0 for o in point_orders))
        assert not (isinstance(so, int) and rep.classification == "Essential")
        assert (so == 0) == (rep.classification == "Removable")
        assert so == 2 * max(point_orders)


class TestSemiregular:
    def test_reciprocal_of_linear_factor(self):
        F = SemiregularForm(X - i, ONE)
        R = semiregular_reciprocal(F)
        x = j * 2 + one
        assert R.evaluate(x) == SemiregularForm(X + i, delta_poly(i)).evaluate(x)

    def test_constant(self):
        c = one + 3 * k - l
        R = semiregular_reciprocal(SemiregularForm(StarPolynomial([c]), ONE))
        assert R.evaluate(j) == c.inverse()

    def test_random_forms_invert(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            F = SemiregularForm(random_poly(rng, O, 2), random_poly(rng, O, 2).normal())
            G = semiregular_mul(F, semiregular_reciprocal(F))
            x = random_unit(rng, O) * rng.uniform(0.2, 2) + rng.uniform(-1, 1)
            if abs(F.num.normal().evaluate(x)) < 1e-3 or abs(F.den.evaluate(x)) < 1e-3:
                continue
            assert G.evaluate(x).isclose(one.to_double(), 1e-9)

    def test_vanishing_normal(self):
        with pytest.raises(NormalIdenticallyZero):
            star_reciprocal(unit_direction_function(i.to_double()))


class TestDensity:
    def test_essential_covers_ball(self):
        res = density_probe(truncated_exp_inverse(O), Element.zero(O), n_samples=200_000,
                            n_targets=500)
        assert res["slice_reduction"] and res["coverage"] >= 0.9

    def test_pole_misses_small_values(self):
        res = density_probe(pole_at(i), i, n_samples=100_000, n_targets=500)
        assert res["coverage"] < 0.9

    def test_removable_stays_near_value(self):
        f = SemiregularForm(delta_poly(i), delta_poly(i))
        near = density_probe(f, i, n_samples=20_000, n_targets=300, target_center=one,
                             target_radius=0.1, shell=(1e-3, 1e-2))
        far = density_probe(f, i, n_samples=20_000, n_targets=300, target_center=-one,
                            target_radius=0.5, shell=(1e-3, 1e-2))
        assert near["coverage"] == 1.0 and far["coverage"] == 0.0
