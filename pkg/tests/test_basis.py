import numpy as np
import pytest

from cgode import (
    Interval,
    LocalPoly,
    antiderivative_from_left,
    derivative,
    gauss_rule,
    legendre_derivatives,
    legendre_values,
    poly_eval,
    project,
)


def test_interval_basics():
    iv = Interval(1.0, 3.5)
    assert iv.k == 2.5
    assert iv.to_reference(1.0) == -1.0
    assert iv.to_reference(3.5) == 1.0
    assert iv.from_reference(0.0) == pytest.approx(2.25)
    # round trip
    t = 2.7
    assert iv.from_reference(iv.to_reference(t)) == pytest.approx(t, abs=1e-15)


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(2.0, 2.0)
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


class TestLegendreValues:
    def test_at_plus_one(self):
        np.testing.assert_allclose(legendre_values(3, 1.0), np.ones(4))

    def test_at_minus_one(self):
        np.testing.assert_allclose(legendre_values(1, -1.0), [1.0, -1.0])

    def test_explicit_quadratic(self):
        # P2(x) = (3x^2 - 1)/2
        np.testing.assert_allclose(legendre_values(2, 0.5), [1.0, 0.5, -0.125], atol=1e-15)

    @pytest.mark.parametrize("r", [0, 1, 4, 9])
    def test_shape(self, r):
        s = np.linspace(-1.0, 1.0, 7)
        assert legendre_values(r, s).shape == (r + 1, 7)

    def test_matches_numpy_legendre(self):
        s = np.linspace(-1.0, 1.0, 21)
        vals = legendre_values(8, s)
        for j in range(9):
            ref = np.polynomial.legendre.legval(s, np.eye(9)[j])
            np.testing.assert_allclose(vals[j], ref, atol=1e-13)


class TestLegendreDerivatives:
    def test_low_orders(self):
        np.testing.assert_allclose(legendre_derivatives(1, 0.3), [0.0, 1.0])
        np.testing.assert_allclose(legendre_derivatives(2, 0.0), [0.0, 1.0, 0.0], atol=1e-15)

    def test_at_plus_one(self):
        # P_j'(1) = j(j+1)/2
        der = legendre_derivatives(5, 1.0)
        expect = [j * (j + 1) / 2 for j in range(6)]
        np.testing.assert_allclose(der, expect, atol=1e-13)

    def test_against_finite_differences(self):
        s = np.linspace(-0.9, 0.9, 13)
        h = 1e-6
        der = legendre_derivatives(6, s)
        fd = (legendre_values(6, s + h) - legendre_values(6, s - h)) / (2 * h)
        np.testing.assert_allclose(der, fd, atol=1e-8)


class TestGaussRule:
    def test_one_point(self):
        rule = gauss_rule(1)
        np.testing.assert_allclose(rule.nodes, [0.0], atol=1e-15)
        np.testing.assert_allclose(rule.weights, [2.0])

    def test_two_point(self):
        rule = gauss_rule(2)
        np.testing.assert_allclose(
            rule.nodes, [-0.5773502691896257, 0.5773502691896257], atol=1e-15
        )
        np.testing.assert_allclose(rule.weights, [1.0, 1.0], atol=1e-15)

    def test_three_point(self):
        rule = gauss_rule(3)
        root = np.sqrt(3.0 / 5.0)
        np.testing.assert_allclose(rule.nodes, [-root, 0.0, root], atol=1e-15)
        np.testing.assert_allclose(rule.weights, [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0], atol=1e-15)

    @pytest.mark.parametrize("q", [1, 2, 3, 5, 8, 13, 20])
    def test_polynomial_exactness(self, q):
        """q points integrate monomials up to degree 2q-1 exactly on [-1,1]."""
        rule = gauss_rule(q)
        for p in range(2 * q):
            got = np.sum(rule.weights * rule.nodes**p)
            want = 0.0 if p % 2 else 2.0 / (p + 1)
            assert got == pytest.approx(want, abs=5e-14)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gauss_rule(0)

    def test_mapped_integration(self):
        # integral of t^2 over (1, 3) is 26/3
        iv = Interval(1.0, 3.0)
        rule = gauss_rule(4)
        samples = rule.mapped_nodes(iv) ** 2
        assert rule.integrate(samples[:, None], iv)[0] == pytest.approx(26.0 / 3.0)


def test_legendre_orthogonality_on_interval():
    """Scaled Legendre Gram matrix on a physical interval is k/(2j+1) diagonal."""
    iv = Interval(0.5, 2.0)
    rule = gauss_rule(10)
    vals = legendre_values(8, rule.nodes)
    for i in range(9):
        for j in range(9):
            integ = rule.integrate((vals[i] * vals[j])[:, None], iv)[0]
            want = iv.k / (2 * j + 1) if i == j else 0.0
            assert integ == pytest.approx(want, abs=1e-12 * iv.k)


class TestProject:
    def test_identity_on_polynomials(self):
        rng = np.random.default_rng(7)
        iv = Interval(0.0, 2.0)
        for deg in (0, 1, 3, 5):
            coeffs = rng.standard_normal((deg + 1, 2))
            p = LocalPoly(iv, coeffs)
            rule = gauss_rule(deg + 1)
            samples = poly_eval(p, rule.mapped_nodes(iv))
            q = project(samples, rule, deg, iv)
            np.testing.assert_allclose(q.coeffs, coeffs, atol=1e-13)

    def test_s_squared_truncated(self):
        iv = Interval(-1.0, 1.0)
        rule = gauss_rule(3)
        samples = (rule.nodes**2)[:, None]
        q = project(samples, rule, 1, iv)
        np.testing.assert_allclose(q.coeffs[:, 0], [1.0 / 3.0, 0.0], atol=1e-14)

    def test_s_squared_full(self):
        iv = Interval(-1.0, 1.0)
        rule = gauss_rule(3)
        samples = (rule.nodes**2)[:, None]
        q = project(samples, rule, 2, iv)
        np.testing.assert_allclose(q.coeffs[:, 0], [1.0 / 3.0, 0.0, 2.0 / 3.0], atol=1e-14)

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        iv = Interval(0.0, 1.0)
        rule = gauss_rule(6)
        samples = rng.standard_normal((6, 3))
        q1 = project(samples, rule, 2, iv)
        q2 = project(poly_eval(q1, rule.mapped_nodes(iv)), rule, 2, iv)
        np.testing.assert_allclose(q2.coeffs, q1.coeffs, atol=1e-14)

    def test_mean_preservation(self):
        rng = np.random.default_rng(13)
        iv = Interval(0.25, 1.75)
        rule = gauss_rule(7)
        samples = rng.standard_normal((7, 2))
        raw = rule.integrate(samples, iv)
        for deg in (0, 1, 2, 4):
            q = project(samples, rule, deg, iv)
            anti = antiderivative_from_left(q)
            np.testing.assert_allclose(poly_eval(anti, iv.b), raw, atol=1e-13)

    def test_rejects_low_quadrature(self):
        iv = Interval(0.0, 1.0)
        rule = gauss_rule(2)
        samples = np.zeros((2, 1))
        with pytest.raises(ValueError):
            project(samples, rule, 2, iv)


class TestAntiderivative:
    def test_of_constant(self):
        k = 1.5
        iv = Interval(0.0, k)
        c = np.array([[2.0, -1.0]])
        q = antiderivative_from_left(LocalPoly(iv, c))
        np.testing.assert_allclose(q.coeffs, [(k / 2) * c[0], (k / 2) * c[0]], atol=1e-15)
        np.testing.assert_allclose(poly_eval(q, k), k * c[0])

    def test_of_zero(self):
        q = antiderivative_from_left(LocalPoly(Interval(0.0, 1.0), np.zeros((3, 2))))
        np.testing.assert_allclose(q.coeffs, np.zeros((4, 2)))

    def test_of_p1(self):
        # antiderivative of P1 from the left edge is (P2 - P0)/3 on [-1,1]
        iv = Interval(-1.0, 1.0)
        q = antiderivative_from_left(LocalPoly(iv, np.array([[0.0], [1.0]])))
        np.testing.assert_allclose(q.coeffs[:, 0], [-1.0 / 3.0, 0.0, 1.0 / 3.0], atol=1e-15)
        assert poly_eval(q, -1.0)[0] == 0.0

    def test_left_value_is_zero(self):
        rng = np.random.default_rng(3)
        iv = Interval(0.7, 2.1)
        p = LocalPoly(iv, rng.standard_normal((5, 3)))
        q = antiderivative_from_left(p)
        np.testing.assert_allclose(poly_eval(q, iv.a), np.zeros(3), atol=1e-15)

    def test_derivative_roundtrip(self):
        rng = np.random.default_rng(5)
        iv = Interval(0.0, 0.8)
        p = LocalPoly(iv, rng.standard_normal((6, 2)))
        back = derivative(antiderivative_from_left(p))
        ts = gauss_rule(8).mapped_nodes(iv)
        np.testing.assert_allclose(poly_eval(back, ts), poly_eval(p, ts), atol=1e-12)


def test_derivative_of_cubic():
    # d/dt of t^3 on (0, 2) checked against 3t^2 pointwise
    iv = Interval(0.0, 2.0)
    rule = gauss_rule(4)
    ts = rule.mapped_nodes(iv)
    p = project((ts**3)[:, None], rule, 3, iv)
    dp = derivative(p)
    np.testing.assert_allclose(poly_eval(dp, ts)[:, 0], 3 * ts**2, atol=1e-12)


class TestPolyEval:
    def test_constant(self):
        p = LocalPoly(Interval(0.0, 1.0), np.array([[4.0, 5.0]]))
        np.testing.assert_allclose(poly_eval(p, 0.3), [4.0, 5.0])

    def test_linear_endpoints(self):
        u0 = np.array([1.0, 2.0])
        u1 = np.array([-3.0, 0.5])
        iv = Interval(2.0, 5.0)
        p = LocalPoly(iv, np.stack([(u0 + u1) / 2, (u1 - u0) / 2]))
        np.testing.assert_allclose(poly_eval(p, iv.a), u0, atol=1e-14)
        np.testing.assert_allclose(poly_eval(p, iv.b), u1, atol=1e-14)

    def test_p2_at_midpoint(self):
        p = LocalPoly(Interval(0.0, 2.0), np.array([[0.0], [0.0], [1.0]]))
        assert poly_eval(p, 1.0)[0] == pytest.approx(-0.5)

    def test_array_argument(self):
        p = LocalPoly(Interval(0.0, 1.0), np.array([[1.0, 0.0], [0.0, 1.0]]))
        out = poly_eval(p, np.array([0.0, 0.5, 1.0]))
        assert out.shape == (3, 2)
        np.testing.assert_allclose(out[:, 0], [1.0, 1.0, 1.0])
        np.testing.assert_allclose(out[:, 1], [-1.0, 0.0, 1.0])

    def test_rejects_outside_interval(self):
        p = LocalPoly(Interval(0.0, 1.0), np.array([[1.0]]))
        with pytest.raises(ValueError):
            poly_eval(p, 1.5)
        with pytest.raises(ValueError):
            poly_eval(p, -0.1)
        # tiny slack beyond the edge is tolerated
        poly_eval(p, 1.0 + 1e-14)


def test_local_poly_validation():
    iv = Interval(0.0, 1.0)
    with pytest.raises(ValueError):
        LocalPoly(iv, np.zeros((0, 2)))
    p = LocalPoly(iv, np.zeros((3, 2)))
    assert p.deg == 2
    assert p.dim == 2
    with pytest.raises(ValueError):
        p.coeffs[0, 0] = 1.0
