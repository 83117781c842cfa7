import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from kickedtop.classical import (
    Angles,
    SpherePoint,
    initial_conditions,
    inversion_conjugacy_check,
    iterate_cloud,
    map_step,
    map_step_special,
    phase_portrait,
    trajectory,
    trajectory_spread,
)
from kickedtop.spinalg import ContractError

HALF_PI = math.pi / 2
unit = st.tuples(st.floats(-1, 1), st.floats(-math.pi, math.pi))


def point(z, phi):
    r = math.sqrt(max(0.0, 1 - z * z))
    return SpherePoint(r * math.cos(phi), r * math.sin(phi), z)


def test_fixed_point():
    for k in (0.5, 3.0, 6.0):
        out = map_step(SpherePoint(0, 1, 0), k, HALF_PI)
        assert_allclose(out.as_array(), [0, 1, 0], atol=1e-15)


def test_pole_orbit_period_four():
    pts = [SpherePoint(0, 0, 1)]
    for _ in range(4):
        pts.append(map_step(pts[-1], 2.7, HALF_PI))
    expected = [(0, 0, 1), (1, 0, 0), (0, 0, -1), (-1, 0, 0), (0, 0, 1)]
    for p, e in zip(pts, expected):
        assert_allclose(p.as_array(), e, atol=1e-15)


@given(unit, st.floats(-10, 10))
def test_two_pi_keeps_z(zp, k):
    v = point(*zp)
    assert map_step(v, k, 2 * math.pi).Z == pytest.approx(v.Z, abs=1e-15)


def test_special_maps_agree(rng):
    starts = initial_conditions(1000, 3)
    for which, p in (("pi/2", HALF_PI), ("pi", math.pi), ("2pi", 2 * math.pi)):
        for k in (1, 2, 3, 6):
            for x in starts:
                v = SpherePoint(*x)
                d = map_step(v, k, p).as_array() - map_step_special(v, k, which).as_array()
                assert np.max(np.abs(d)) < 1e-12
    with pytest.raises(ContractError):
        map_step_special(SpherePoint(0, 0, 1), 1.0, "pi/3")


def test_theta_under_pi_and_two_pi():
    start = Angles(0.7, 0.4)
    traj = trajectory(start, 3 * math.pi / 5, math.pi, 20)
    for t, a in enumerate(traj):
        assert a.theta == pytest.approx(0.7 if t % 2 == 0 else math.pi - 0.7, abs=1e-12)
    for a in trajectory(start, 3 * math.pi / 5, 2 * math.pi, 20):
        assert a.theta == pytest.approx(0.7, abs=1e-12)


def test_fixed_point_trajectory():
    # from angles the start carries ~6e-17 of rounding; fine while the point is elliptic
    for k in (0.5, 1.0, 2.0):
        for a in trajectory(Angles(HALF_PI, HALF_PI), k, HALF_PI, 1000):
            assert a.theta == pytest.approx(HALF_PI, abs=1e-12)
            assert a.phi == pytest.approx(HALF_PI, abs=1e-12)


@pytest.mark.parametrize("k", [1.0, 3.0, 6.0, 20.0])
def test_exact_fixed_point_any_k(k):
    v = SpherePoint(0.0, 1.0, 0.0)
    for _ in range(1000):
        v = map_step(v, k, HALF_PI)
    assert v == SpherePoint(0.0, 1.0, 0.0)


def test_fixed_point_turns_hyperbolic():
    # past k = 2 rounding noise at the fixed point grows instead of circulating
    traj = trajectory(Angles(HALF_PI, HALF_PI), 6.0, HALF_PI, 1000)
    assert max(abs(a.theta - HALF_PI) for a in traj) > 1e-3


def test_zero_kick_stays_on_sphere():
    cloud = iterate_cloud(initial_conditions(5, 1), 0.0, HALF_PI, 10_000)
    r2 = np.sum(cloud**2, axis=-1)
    assert np.max(np.abs(r2 - 1)) < 1e-12
    # rotation about y leaves Y alone
    assert np.max(np.abs(cloud[:, :, 1] - cloud[:, :1, 1])) < 1e-12


def test_chaotic_trajectory_visits_both_hemispheres():
    z = np.array([math.cos(a.theta) for a in trajectory(Angles(1.0, 0.3), 6.0, HALF_PI, 500)])
    assert (z > 0.2).any() and (z < -0.2).any()


def test_spread_separates_regimes():
    s1 = trajectory_spread(phase_portrait(1.0, HALF_PI, 100, 500, seed=0))
    s6 = trajectory_spread(phase_portrait(6.0, HALF_PI, 100, 500, seed=0))
    # measured 0.0054 vs 0.079 on this seed
    assert s6 > 5 * s1


def test_portrait_inversion():
    starts = initial_conditions(50, 4)
    a = iterate_cloud(starts, 2.0, HALF_PI, 100)
    b = iterate_cloud(-starts, -2.0, HALF_PI, 100)
    assert np.max(np.abs(a + b)) < 1e-9


def test_portrait_deterministic():
    a = phase_portrait(3.0, HALF_PI, 30, 50, seed=9)
    b = phase_portrait(3.0, HALF_PI, 30, 50, seed=9)
    assert a.points.tobytes() == b.points.tobytes()
    assert list(a.rows())[:3] == list(b.rows())[:3]


@given(unit, st.floats(-20, 20), st.floats(-7, 7))
@settings(max_examples=200)
def test_inversion_conjugacy(zp, k, p):
    assert inversion_conjugacy_check(point(*zp), k, p) < 1e-14


def test_conjugacy_at_fixed_point():
    v = SpherePoint(0, 1, 0)
    assert_allclose(map_step(v, 2.0, HALF_PI).as_array(), [0, 1, 0], atol=1e-15)
    assert_allclose(map_step(-v, -2.0, HALF_PI).as_array(), [0, -1, 0], atol=1e-15)


def test_angle_round_trip():
    for theta, phi in [(0.0, 0.0), (math.pi, 0.0), (1.0, math.pi), (2.0, -1.0)]:
        a = Angles(theta, phi).to_point().to_angles()
        assert a.theta == pytest.approx(theta, abs=1e-12)
        assert a.phi == pytest.approx(phi, abs=1e-12)
    with pytest.raises(ContractError):
        Angles(1.0, -math.pi)
    with pytest.raises(ContractError):
        SpherePoint(1, 1, 0)
