import numpy as np
import pytest

from rhs_lab.scenarios import BUILTIN, Scenario, ScenarioError, compile_expression, get_scenario, parse_points


def test_builtin_data():
    assert BUILTIN["one_point"].points == ((0.1, 0.1),)
    assert BUILTIN["symmetric"].points == ((0.1, 0.1), (0.9, -0.1))
    assert BUILTIN["chasing"].points == ((0.1, 0.2), (0.2, 0.1))
    assert BUILTIN["asymmetric"].points == ((0.1, 0.2), (0.2, -0.125))


def test_sine_has_101_nodes():
    st, vel = BUILTIN["smooth_sine"].initial(4)
    assert vel.u.size == 101 and st.n == 99
    np.testing.assert_allclose(vel.interior, np.sin(2 * np.pi * st.Q))


def test_point_initial_velocity_is_exact():
    st, vel = BUILTIN["asymmetric"].initial(4)
    np.testing.assert_array_equal(vel.interior, [0.2, -0.125])
    assert st.P.size == 2


def test_custom_expression():
    sc = get_scenario("custom", u0="x*(1-x)", n=1)
    st, vel = sc.initial(2)
    assert vel.interior[0] == 0.25 and st.P[0] == pytest.approx(1.0)


def test_custom_points():
    sc = get_scenario("custom", points="0.2:0.1, 0.5:-0.3")
    assert sc.points == ((0.2, 0.1), (0.5, -0.3)) and sc.size == 2


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "open('f')", "lambda: 1", "'a'", "x if x else 1",
                                  "y + 1", "sin(x)[0]"])
def test_unsafe_expressions(text):
    with pytest.raises(ScenarioError):
        compile_expression(text)


def test_expression_functions():
    f = compile_expression("sin(2*pi*x) + 0*exp(x)")
    np.testing.assert_allclose(f(np.array([0.25])), [1.0])
    assert compile_expression("1")(np.zeros(3)).shape == (3,)


def test_bad_points():
    for text in ("", "0.1", "0.1:a", "0.5:0,0.2:0", "1.5:0"):
        with pytest.raises(ScenarioError):
            get_scenario("custom", points=text)


def test_lookup_errors():
    with pytest.raises(ScenarioError):
        get_scenario("nope")
    with pytest.raises(ScenarioError):
        get_scenario("custom")
    with pytest.raises(ScenarioError):
        get_scenario("one_point", points="0.1:0.1")
    with pytest.raises(ScenarioError):
        get_scenario("one_point", n=3)
    with pytest.raises(ScenarioError):
        Scenario("x")


def test_overrides():
    assert get_scenario("smooth_sine", n=9, t_end=0.5).initial(2)[0].n == 9
    assert get_scenario("chasing", t_end=1.5).t_end == 1.5
    assert parse_points("0.1:0.2") == ((0.1, 0.2),)
