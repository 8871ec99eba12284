import warnings

import numpy as np
import pytest

from rhs_lab.core import (
    DegenerateGeometryError,
    Domain1D,
    ParticleState,
    VelocityProfile,
    check_exponent,
    energy,
    interpolate_initial,
    ipow,
    momentum_from_velocity,
    slopes,
)


def tent(q, u):
    st = ParticleState([q], [0.0])
    return st, VelocityProfile.from_interior([u], st.nodes)


class TestTypes:
    @pytest.mark.parametrize("r", [0, 1, 3, 5, -2, 2.5])
    def test_bad_exponent(self, r):
        with pytest.raises(ValueError):
            check_exponent(r)

    def test_exponent_accepts_even(self):
        assert check_exponent(4.0) == 4

    def test_domain_order(self):
        with pytest.raises(ValueError):
            Domain1D(1.0, 1.0)

    @pytest.mark.parametrize("Q", [[0.5, 0.5], [0.6, 0.4], [0.0, 0.5], [0.5, 1.0]])
    def test_state_ordering(self, Q):
        with pytest.raises(ValueError):
            ParticleState(Q, [0.0, 0.0])

    def test_state_needs_points(self):
        with pytest.raises(ValueError):
            ParticleState([], [])

    def test_state_is_immutable(self):
        st = ParticleState([0.3], [1.0])
        with pytest.raises(ValueError):
            st.Q[0] = 0.4

    def test_boundary_velocity_zero(self):
        with pytest.raises(ValueError):
            VelocityProfile([0.1, 1.0, 0.0], [0.0, 0.5, 1.0])

    def test_profile_interpolates(self):
        _, vel = tent(0.5, 1.0)
        assert vel(0.25) == pytest.approx(0.5)


class TestSlopes:
    def test_tent(self):
        np.testing.assert_allclose(slopes(*tent(0.5, 1.0)), [2.0, -2.0])

    def test_zero(self):
        assert not np.any(slopes(*tent(0.3, 0.0)))

    def test_chasing_data(self):
        st = ParticleState([0.1, 0.2], [0.0, 0.0])
        vel = VelocityProfile.from_interior([0.2, 0.1], st.nodes)
        np.testing.assert_allclose(slopes(st, vel), [2.0, -1.0, -0.125], rtol=1e-14)

    def test_degenerate(self):
        st = ParticleState([0.5, 0.5 + 1e-13], [0.0, 0.0])
        with pytest.raises(DegenerateGeometryError):
            slopes(st, VelocityProfile.from_interior([0.0, 0.0], st.nodes))

    def test_size_mismatch(self):
        st = ParticleState([0.5, 0.6], [0.0, 0.0])
        with pytest.raises(ValueError):
            slopes(st, VelocityProfile([0.0, 1.0, 0.0], [0.0, 0.5, 1.0]))


class TestEnergy:
    def test_one_point_r2(self):
        # u^2 / 2 (1/q + 1/(1 - q)) at (0.1, 0.1)
        assert energy(*tent(0.1, 0.1), 2) == pytest.approx(0.01 / 2 * (10 + 1 / 0.9), rel=1e-15)
        assert energy(*tent(0.1, 0.1), 2) == pytest.approx(0.0555556, abs=1e-7)

    def test_zero(self):
        assert energy(*tent(0.4, 0.0), 6) == 0.0

    def test_symmetric_r4(self):
        assert energy(*tent(0.5, 0.2), 4) == pytest.approx(0.0064, rel=1e-14)


class TestMomentum:
    def test_r2(self):
        np.testing.assert_allclose(momentum_from_velocity(*tent(0.5, 1.0), 2), [4.0])

    def test_zero(self):
        assert not np.any(momentum_from_velocity(*tent(0.5, 0.0), 4))

    def test_r4(self):
        np.testing.assert_allclose(momentum_from_velocity(*tent(0.5, 0.5), 4), [2.0])


class TestPowers:
    def test_signed_odd(self):
        assert ipow(-2.0, 3) == -8.0
        assert ipow(-2.0, 4) == 16.0

    def test_matches_pow(self, rng):
        x = rng.normal(size=100)
        for k in range(0, 12):
            np.testing.assert_allclose(ipow(x, k), x**k, rtol=1e-14)

    def test_negative_exponent(self):
        with pytest.raises(ValueError):
            ipow(1.0, -1)


class TestInterpolate:
    def test_zero(self):
        st, vel = interpolate_initial(lambda x: 0 * x, 5)
        assert not np.any(st.P) and not np.any(vel.u)

    def test_sine_nodes(self):
        st, vel = interpolate_initial(lambda x: np.sin(2 * np.pi * x), 99)
        np.testing.assert_allclose(st.Q, np.arange(1, 100) / 100, atol=1e-15)
        np.testing.assert_allclose(vel.interior, np.sin(2 * np.pi * st.Q))
        assert vel.u.size == 101

    def test_parabola_r2(self):
        st, vel = interpolate_initial(lambda x: x * (1 - x), 1)
        assert st.Q[0] == 0.5 and vel.interior[0] == 0.25
        np.testing.assert_allclose(st.P, [1.0])

    def test_clamps_with_warning(self):
        with pytest.warns(UserWarning, match="does not vanish"):
            _, vel = interpolate_initial(lambda x: 1 + 0 * x, 3)
        assert vel.u[0] == 0.0 and vel.u[-1] == 0.0

    def test_no_warning_for_clean_data(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            interpolate_initial(lambda x: np.sin(np.pi * x), 4)

    def test_needs_a_point(self):
        with pytest.raises(ValueError):
            interpolate_initial(np.sin, 0)
