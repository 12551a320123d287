"""Physics tests: frozen hand-computed values, symmetry, failure rules, energy."""
import math

import pytest

from rewindrl.cartpole import (
    FAILURE_ANGLE,
    Action,
    ContinuousState,
    PhysicsParams,
    initial_state,
    integrate_force,
    is_failure,
    step,
)
from rewindrl.discretize import discretize
from rewindrl.rngstream import RandomStream


def state(x=0.0, x_dot=0.0, theta=0.0, theta_dot=0.0, t=0):
    return ContinuousState(x, x_dot, theta, theta_dot, t)


def random_nonfailing(rng):
    while True:
        s = state(
            x=rng.random() * 4.0 - 2.0,
            x_dot=rng.random() * 4.0 - 2.0,
            theta=(rng.random() * 2.0 - 1.0) * FAILURE_ANGLE * 0.99,
            theta_dot=rng.random() * 6.0 - 3.0,
        )
        if not is_failure(s):
            return s


class TestStep:
    def test_push_right_from_rest_matches_hand_evaluation(self):
        # one Euler step evaluated by hand in an independent script
        out = step(initial_state(), Action.PUSH_RIGHT)
        assert out.next_state.x == 0.0
        assert out.next_state.theta == 0.0
        assert out.next_state.x_dot == pytest.approx(0.1951219512195122, abs=1e-15)
        assert out.next_state.theta_dot == pytest.approx(-0.2926829268292683, abs=1e-15)
        assert out.reward == 0.0
        assert not out.failed
        assert out.next_state.time_index == 1

    def test_mirror_symmetry_is_exact(self):
        rng = RandomStream(2024)
        for _ in range(500):
            s = random_nonfailing(rng)
            right = step(s, Action.PUSH_RIGHT).next_state
            left = step(s.mirrored(), Action.PUSH_LEFT).next_state
            assert right.mirrored() == left  # bitwise: the arithmetic is sign-symmetric

    def test_determinism(self):
        s = state(0.3, -0.5, 0.05, 0.4)
        outs = {step(s, Action.PUSH_LEFT) for _ in range(10)}
        assert len(outs) == 1

    def test_rejects_failing_state(self):
        with pytest.raises(ValueError):
            step(state(theta=math.radians(13.0)), Action.PUSH_LEFT)

    def test_tilting_past_twelve_degrees_costs_one(self):
        # just inside the cone, rotating hard outward
        s = state(theta=math.radians(11.9), theta_dot=3.0)
        out = step(s, Action.PUSH_LEFT)
        assert abs(out.next_state.theta) > math.radians(12.0)
        assert out.failed
        assert out.reward == -1.0

    def test_reward_failure_coupling_on_random_walks(self):
        rng = RandomStream(7)
        s = initial_state()
        for _ in range(2000):
            out = step(s, Action(rng.randrange(2)))
            assert (out.reward == -1.0) == out.failed
            assert out.reward in (-1.0, 0.0)
            assert out.next_state.time_index == s.time_index + 1
            s = initial_state() if out.failed else out.next_state


class TestFailure:
    def test_upright_centered_is_fine(self):
        assert not is_failure(state())

    def test_thirteen_degrees_fails(self):
        assert is_failure(state(theta=math.radians(13.0)))
        assert is_failure(state(theta=-math.radians(13.0)))

    def test_exactly_twelve_degrees_still_balances(self):
        assert not is_failure(state(theta=FAILURE_ANGLE))

    def test_track_edges(self):
        assert is_failure(state(x=2.3))
        assert is_failure(state(x=-2.3))
        assert not is_failure(state(x=2.2))

    def test_velocities_do_not_fail(self):
        assert not is_failure(state(x_dot=99.0, theta_dot=99.0))


class TestInitialState:
    def test_all_zero(self):
        s = initial_state()
        assert (s.x, s.x_dot, s.theta, s.theta_dot, s.time_index) == (0, 0, 0, 0, 0)

    def test_not_failing(self):
        assert not is_failure(initial_state())

    def test_discretizes(self):
        assert 0 <= discretize(initial_state()) <= 161


class TestParams:
    def test_table_defaults(self):
        p = PhysicsParams()
        assert (p.track_length, p.pole_length, p.pole_mass, p.cart_mass) == (4.4, 1.0, 0.1, 1.0)
        assert (p.dt, p.force_magnitude, p.gravity) == (0.02, 10.0, 9.8)
        assert p.half_track == 2.2

    @pytest.mark.parametrize("field", ["track_length", "pole_mass", "dt", "gravity"])
    def test_rejects_non_positive(self, field):
        with pytest.raises(ValueError):
            PhysicsParams(**{field: 0.0})
        with pytest.raises(ValueError):
            PhysicsParams(**{field: -1.0})


def mechanical_energy(s, p):
    # cart KE + pole KE (translation of the centre + rotation about it) + pole PE
    l = p.half_pole
    ke = 0.5 * p.cart_mass * s.x_dot**2
    ke += 0.5 * p.pole_mass * (
        s.x_dot**2 + 2 * l * s.x_dot * s.theta_dot * math.cos(s.theta) + l * l * s.theta_dot**2
    )
    ke += 0.5 * (p.pole_mass * l * l / 3.0) * s.theta_dot**2
    return ke + p.pole_mass * p.gravity * l * math.cos(s.theta)


def test_energy_drift_under_zero_force_stays_small():
    # coasting (no push): per-step energy drift below 1% of the initial energy
    # while the pole free-falls within the 12-degree cone (about 2 seconds
    # starting from 0.01 degrees)
    p = PhysicsParams()
    s = state(theta=math.radians(0.01))
    e0 = mechanical_energy(s, p)
    prev = e0
    for _ in range(100):
        s = integrate_force(s, 0.0, p)
        assert abs(s.theta) < FAILURE_ANGLE
        e = mechanical_energy(s, p)
        assert abs(e - prev) < 0.01 * e0
        prev = e
