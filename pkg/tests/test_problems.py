import math

import numpy as np
import pytest

from cgode import (
    Interval,
    SkewCheckFailed,
    get_problem,
    list_problems,
    make_linear_skew,
    skew3x3_exact,
    skew3x3_matrix,
)


class TestSkew3x3Matrix:
    def test_at_zero(self):
        np.testing.assert_array_equal(
            skew3x3_matrix(0.0),
            [[0.0, 0.0, 0.0], [0.0, 0.0, 3.0], [0.0, -3.0, 0.0]],
        )

    def test_skew_symmetric_exactly(self):
        for t in np.linspace(0.0, 4.0, 17):
            A = skew3x3_matrix(t)
            np.testing.assert_array_equal(A + A.T, np.zeros((3, 3)))

    def test_decay_entry(self):
        assert skew3x3_matrix(1.0)[1, 2] == pytest.approx(3 * math.exp(-1.0), abs=1e-15)
        assert skew3x3_matrix(1.0)[1, 2] == pytest.approx(1.1036383235143269, abs=1e-12)


class TestSkew3x3Exact:
    def test_initial_value(self):
        np.testing.assert_array_equal(skew3x3_exact(0.0), [1.0, 0.0, 0.0])

    def test_half_period(self):
        np.testing.assert_allclose(skew3x3_exact(math.sqrt(math.pi)), [-1.0, 0.0, 0.0], atol=1e-12)

    def test_unit_norm(self):
        for t in np.linspace(0.0, 4.0, 33):
            assert np.linalg.norm(skew3x3_exact(t)) == pytest.approx(1.0, abs=1e-14)

    def test_satisfies_ode(self):
        """Central differences of the closed form track A(t) u(t)."""
        h = 1e-6
        for t in np.linspace(h, 4.0, 100):
            du = (skew3x3_exact(t + h) - skew3x3_exact(t - h)) / (2 * h)
            assert np.linalg.norm(du - skew3x3_matrix(t) @ skew3x3_exact(t)) <= 1e-6


class TestMakeLinearSkew:
    def test_constant_rotation(self):
        F = make_linear_skew(lambda t: np.array([[0.0, -1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(F.eval(0.7, np.array([1.0, 0.0])), [0.0, 1.0])
        assert F.claims_orthogonal
        assert F.claims_lower_adjoint
        assert F.matrix is not None
        assert F.lipschitz(Interval(0.0, 1.0)) == pytest.approx(1.0)

    def test_zero_matrix(self):
        F = make_linear_skew(lambda t: np.zeros((2, 2)))
        np.testing.assert_array_equal(F.eval(0.3, np.array([1.0, 2.0])), [0.0, 0.0])
        assert F.lipschitz(Interval(0.0, 1.0)) == 0.0

    def test_rejects_non_skew(self):
        with pytest.raises(SkewCheckFailed) as excinfo:
            make_linear_skew(lambda t: np.eye(2))
        assert 0.0 <= excinfo.value.t <= 4.0

    def test_rejects_skew_broken_at_late_times(self):
        # skew at t = 0, symmetric part grows with t; the reported time
        # must point at a sample where the check actually fails
        def A(t):
            return np.array([[0.0, -1.0], [1.0, t]])

        with pytest.raises(SkewCheckFailed) as excinfo:
            make_linear_skew(A)
        assert excinfo.value.t > 0.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            make_linear_skew(lambda t: np.zeros((2, 3)))

    def test_lipschitz_is_max_sampled_spectral_norm(self):
        F = make_linear_skew(skew3x3_matrix)
        iv = Interval(3.0, 4.0)
        got = F.lipschitz(iv)
        # independent reference: largest singular value at 16 sample times
        samples = [
            np.linalg.svd(skew3x3_matrix(t), compute_uv=False)[0]
            for t in np.linspace(iv.a, iv.b, 16)
        ]
        assert got == pytest.approx(max(samples), abs=1e-12)
        assert got >= np.linalg.svd(skew3x3_matrix(4.0), compute_uv=False)[0] - 1e-12


class TestRegistry:
    def test_names(self):
        assert list(list_problems()) == ["paper3x3", "rotation2d", "zero"]

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="paper3x3"):
            get_problem("nope")

    @pytest.mark.parametrize("name", ["paper3x3", "rotation2d", "zero"])
    def test_exact_starts_at_u0(self, name):
        prob = get_problem(name)
        assert prob.name == name
        np.testing.assert_allclose(prob.exact(0.0), prob.u0, atol=1e-14)

    @pytest.mark.parametrize("name", ["paper3x3", "rotation2d", "zero"])
    def test_orthogonality_property(self, name):
        """<F(t,v), v> vanishes for random states at random times."""
        prob = get_problem(name)
        assert prob.rhs.claims_orthogonal
        rng = np.random.default_rng(42)
        for _ in range(1000):
            t = float(rng.uniform(0.0, 4.0))
            v = rng.standard_normal(prob.rhs.dim)
            fv = prob.rhs.eval(t, v)
            bound = 1e-12 * max(np.linalg.norm(v) * np.linalg.norm(fv), 1e-30)
            assert abs(float(fv @ v)) <= bound or np.linalg.norm(fv) == 0.0

    @pytest.mark.parametrize("name", ["paper3x3", "rotation2d", "zero"])
    def test_lower_adjoint_property(self, name):
        # skew matrices satisfy <Fv, w> = -<v, Fw> with equality
        prob = get_problem(name)
        assert prob.rhs.claims_lower_adjoint
        rng = np.random.default_rng(43)
        for _ in range(1000):
            t = float(rng.uniform(0.0, 4.0))
            v = rng.standard_normal(prob.rhs.dim)
            w = rng.standard_normal(prob.rhs.dim)
            fv = prob.rhs.eval(t, v)
            fw = prob.rhs.eval(t, w)
            defect = abs(float(fv @ w) + float(v @ fw))
            scale = 1.0 + np.linalg.norm(fv) * np.linalg.norm(w) + np.linalg.norm(v) * np.linalg.norm(fw)
            assert defect <= 1e-12 * scale

    def test_rotation_exact_solution(self):
        prob = get_problem("rotation2d")
        for t in (0.0, 0.5, 2.0, math.pi):
            np.testing.assert_allclose(prob.exact(t), [math.cos(t), math.sin(t)], atol=1e-15)

    def test_zero_problem_is_constant(self):
        prob = get_problem("zero")
        np.testing.assert_array_equal(prob.exact(3.0), prob.u0)
        np.testing.assert_array_equal(prob.rhs.eval(1.0, np.array([5.0, -2.0])), [0.0, 0.0])

    def test_paper3x3_wiring(self):
        prob = get_problem("paper3x3")
        np.testing.assert_array_equal(prob.u0, [1.0, 0.0, 0.0])
        v = np.array([0.2, -0.4, 1.0])
        np.testing.assert_allclose(prob.rhs.eval(1.3, v), skew3x3_matrix(1.3) @ v, atol=1e-15)
        np.testing.assert_allclose(prob.exact(2.2), skew3x3_exact(2.2), atol=1e-15)
