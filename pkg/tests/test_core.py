import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from needlecast.core import (
    TILT_CAP,
    DepthMap,
    GrayImage,
    LightSource,
    NeedleMap,
    Normal,
    Orientation,
    OrientationField,
    angles_from_gradient,
    angles_from_normal,
    angles_from_normals,
    normal_from_angles,
    normal_from_depth_gradient,
    normals_from_angles,
    wrap_angle,
    wrap_angle_diff,
    wrap_angles,
)
from needlecast.errors import NonVisibleNormal

finite = st.floats(-1e6, 1e6, allow_nan=False)
slants = st.floats(-math.pi, math.pi, exclude_min=True)
tilts = st.floats(0.0, 1.5)


@given(finite)
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    # same direction on the circle
    assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-6)
    assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-6)


@given(slants)
def test_wrap_angle_identity_in_range(a):
    assert wrap_angle(a) == a


def test_wrap_angle_endpoints():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle_diff(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(-0.2)


@given(slants, slants)
def test_wrap_angle_diff_antisymmetric(a, b):
    d = wrap_angle_diff(a, b)
    assert abs(d) <= math.pi
    if abs(d) < math.pi:
        assert wrap_angle_diff(b, a) == pytest.approx(-d, abs=1e-12)


def test_wrap_angles_matches_scalar(rng):
    a = rng.uniform(-20, 20, 500)
    np.testing.assert_array_equal(wrap_angles(a), [wrap_angle(v) for v in a])


@given(slants, tilts)
def test_angles_normal_round_trip(s, t):
    o = Orientation(s, t)
    n = normal_from_angles(o)
    back = angles_from_normal(n)
    assert back.tilt == pytest.approx(t, abs=1e-12)
    if t > 1e-6:
        assert abs(wrap_angle_diff(back.slant, s)) < 1e-9


def test_orientation_validation():
    with pytest.raises(ValueError):
        Orientation(-math.pi, 0.1)
    with pytest.raises(ValueError):
        Orientation(0.0, math.pi / 2)
    Orientation(math.pi, 0.0)


def test_normal_must_be_unit_and_visible():
    with pytest.raises(ValueError):
        Normal(1.0, 1.0, 1.0)
    with pytest.raises(NonVisibleNormal):
        angles_from_normal(Normal(1.0, 0.0, 0.0))
    with pytest.raises(NonVisibleNormal):
        angles_from_normal(Normal(0.0, 0.6, -0.8))


def test_zenith_normal_has_zero_slant():
    o = angles_from_normal(Normal(0.0, 0.0, 1.0))
    assert o == Orientation(0.0, 0.0)


def test_normal_from_depth_gradient():
    n = normal_from_depth_gradient(1.0, 0.0)
    np.testing.assert_allclose(n.as_array(), [-1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
    # surface rising toward +x faces -x: slant pi
    assert angles_from_normal(n).slant == pytest.approx(math.pi)


def test_array_forms_match_scalar(rng):
    s = rng.uniform(-math.pi, math.pi, 200)
    t = rng.uniform(0, 1.5, 200)
    nx, ny, nz = normals_from_angles(s, t)
    s2, t2 = angles_from_normals(nx, ny, nz)
    for k in range(200):
        n = normal_from_angles(Orientation(s[k], t[k]))
        assert (nx[k], ny[k], nz[k]) == (n.x, n.y, n.z)
    np.testing.assert_allclose(t2, t, atol=1e-12)


def test_angles_from_gradient_caps_tilt():
    f = angles_from_gradient(np.array([[1e12, 0.0]]), np.array([[0.0, 0.0]]))
    assert f.tilt[0, 0] == TILT_CAP
    assert f.tilt[0, 1] == 0.0 and f.slant[0, 1] == 0.0


def test_light_source():
    assert LightSource().direction == (0.0, 0.0, 1.0)
    l = LightSource.toward(0, 3, 4)
    np.testing.assert_allclose(l.direction, (0, 0.6, 0.8))
    with pytest.raises(ValueError):
        LightSource((0, 0, 2))
    with pytest.raises(ValueError):
        LightSource(k_max=0)


def test_grids_are_read_only():
    g = GrayImage(np.zeros((2, 3)))
    assert (g.height, g.width) == (2, 3)
    with pytest.raises(ValueError):
        g.intensities[0, 0] = 1
    with pytest.raises(ValueError):
        GrayImage(np.full((2, 2), 1.5))
    with pytest.raises(ValueError):
        DepthMap(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        DepthMap(np.zeros((2, 2)), spacing=0)


def test_orientation_field_indexing():
    f = OrientationField(np.array([[0.5]]), np.array([[0.25]]))
    assert f[0, 0] == Orientation(0.5, 0.25)
    with pytest.raises(ValueError):
        OrientationField(np.zeros((2, 2)), np.zeros((2, 3)))


def test_needle_map_states():
    nm = NeedleMap.empty(3, 4)
    assert not nm.assigned.any()
    nm.slant[1, 1], nm.tilt[1, 1], nm.distance[1, 1] = 0.1, 0.2, 0.0
    nm.slant[0, 0], nm.tilt[0, 0] = 0.3, 0.4
    nm.boundary[0, 0] = True
    assert nm.assigned.sum() == 2
    assert nm.solved.sum() == 1 and nm.solved[1, 1]
    other = NeedleMap(nm.slant.copy(), nm.tilt.copy(), nm.distance.copy(), nm.boundary.copy())
    assert other == nm
    other.tilt[1, 1] = 0.5
    assert other != nm
