import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emtrack.errors import DuplicateFrequency, SingularPoint
from emtrack.fieldmodel import (
    CoilSpec,
    SensorSpec,
    TransmitterArray,
    biot_savart_field,
    default_array,
    dipole_field,
    forward_model,
    forward_model_batch,
    sensor_normal,
)
from emtrack.pose import Pose5DOF

from oracles import (
    dipole_equatorial,
    dipole_on_axis,
    loop_on_axis_bz,
    rotation_matrix,
)

Z_COIL = CoilSpec(0, (0, 0, 0), (0, 0, 1), 1.0, 20000.0, loop_radius=0.01)


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b)


class TestCoilSpec:
    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError):
            CoilSpec(0, (0, 0, 0), (0, 0, 1.001), 1.0, 1000.0)

    @pytest.mark.parametrize("field", ["moment_magnitude", "frequency", "loop_radius"])
    def test_rejects_nonpositive(self, field):
        kw = dict(id=0, center=(0, 0, 0), axis=(0, 0, 1), moment_magnitude=1.0, frequency=1.0, loop_radius=0.01)
        kw[field] = 0.0
        with pytest.raises(ValueError):
            CoilSpec(**kw)

    def test_array_needs_five_coils(self):
        coils = tuple(CoilSpec(k, (k * 0.1, 0, 0), (0, 0, 1), 1.0, 1000.0 + k) for k in range(4))
        with pytest.raises(ValueError):
            TransmitterArray(coils)

    def test_array_rejects_duplicate_frequency(self):
        coils = tuple(CoilSpec(k, (k * 0.1, 0, 0), (0, 0, 1), 1.0, 1000.0) for k in range(5))
        with pytest.raises(DuplicateFrequency):
            TransmitterArray(coils)

    def test_default_array_layout(self, array):
        assert array.K == 8
        assert [c.frequency for c in array.coils] == [20000.0 + 2000.0 * k for k in range(8)]
        sites = {(round(c.center[0], 3), round(c.center[1], 3)) for c in array.coils}
        expected = {(x, y) for x in (-0.07, 0.0, 0.07) for y in (-0.07, 0.0, 0.07)} - {(0.0, 0.0)}
        assert sites == expected
        assert all(c.axis == (0.0, 0.0, 1.0) and c.moment_magnitude == 0.5 for c in array.coils)


class TestDipoleField:
    def test_on_axis(self):
        b = dipole_field(Z_COIL, (0, 0, 0.1)).b
        np.testing.assert_allclose(b, [0, 0, 2.0e-4], rtol=1e-12, atol=1e-20)
        assert b[2] == pytest.approx(dipole_on_axis(1.0, 0.1), rel=1e-12)

    def test_equatorial(self):
        b = dipole_field(Z_COIL, (0.1, 0, 0)).b
        np.testing.assert_allclose(b, [0, 0, -1.0e-4], rtol=1e-12, atol=1e-20)
        assert b[2] == pytest.approx(dipole_equatorial(1.0, 0.1), rel=1e-12)

    def test_matches_biot_savart_at_example_point(self):
        p = (0.05, 0.04, 0.12)
        dip = dipole_field(Z_COIL, p).b
        bs = biot_savart_field(Z_COIL, p, segments=10000).b
        assert abs(np.linalg.norm(dip) - np.linalg.norm(bs)) / np.linalg.norm(bs) < 0.005

    def test_singular_point(self):
        with pytest.raises(SingularPoint):
            dipole_field(Z_COIL, (0, 0, 5e-7))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_rotation_covariance(self, seed):
        rng = np.random.default_rng(seed)
        rot = rotation_matrix(rng)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        p = rng.normal(size=3) * 0.1
        if np.linalg.norm(p) < 0.01:
            p = p / np.linalg.norm(p) * 0.05
        coil = CoilSpec(0, (0, 0, 0), axis, 0.7, 1000.0)
        turned = CoilSpec(0, (0, 0, 0), rot @ axis / np.linalg.norm(rot @ axis), 0.7, 1000.0)
        b = dipole_field(coil, p).b
        b_rot = dipole_field(turned, rot @ p).b
        assert rel_err(b_rot, rot @ b) < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_inverse_cube_scaling(self, seed):
        rng = np.random.default_rng(seed)
        center = rng.normal(size=3) * 0.1
        axis = rng.normal(size=3)
        coil = CoilSpec(0, center, axis / np.linalg.norm(axis), 0.5, 1000.0)
        r = rng.normal(size=3)
        r = r / np.linalg.norm(r) * rng.uniform(0.02, 0.3)
        near = np.linalg.norm(dipole_field(coil, center + r).b)
        far = np.linalg.norm(dipole_field(coil, center + 2 * r).b)
        assert far / near == pytest.approx(1 / 8, rel=1e-10)


class TestBiotSavart:
    def test_on_axis_closed_form(self):
        b = biot_savart_field(Z_COIL, (0, 0, 0.1), segments=4096).b
        expected = loop_on_axis_bz(1.0, 0.01, 0.1)
        assert expected == pytest.approx(1.97037e-4, rel=1e-5)
        assert b[2] == pytest.approx(expected, rel=1e-12)
        assert abs(b[0]) < 1e-15 and abs(b[1]) < 1e-15

    def test_segment_doubling_converges(self):
        coil = CoilSpec(0, (0.01, -0.02, 0), (0.6, 0, 0.8), 1.0, 1000.0, loop_radius=0.01)
        for p in [(0.05, 0.04, 0.12), (0.02, 0.0, 0.015), (0.0, 0.1, 0.0)]:
            coarse = biot_savart_field(coil, p, 4096).b
            fine = biot_savart_field(coil, p, 8192).b
            assert rel_err(coarse, fine) < 1e-9

    def test_rejects_point_on_wire(self):
        with pytest.raises(SingularPoint):
            biot_savart_field(Z_COIL, (0.01, 0, 0))

    def test_rejects_too_few_segments(self):
        with pytest.raises(ValueError):
            biot_savart_field(Z_COIL, (0, 0, 0.1), segments=32)

    def test_far_field_agreement_at_20_radii(self):
        # expectation as stated for the build: dipole within 0.1 % of the loop at 20 radii
        direction = np.array([0.05, 0.04, 0.12])
        p = direction / np.linalg.norm(direction) * 20 * Z_COIL.loop_radius
        dip = dipole_field(Z_COIL, p).b
        bs = biot_savart_field(Z_COIL, p, 8192).b
        assert abs(np.linalg.norm(dip) - np.linalg.norm(bs)) / np.linalg.norm(bs) < 0.001

    def test_dipole_error_follows_inverse_square_law(self, rng):
        # the loop's leading correction is -(3/2)(a/r)^2 on axis, the worst direction
        a = Z_COIL.loop_radius
        for _ in range(40):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            r = rng.uniform(5, 40) * a
            dip = dipole_field(Z_COIL, d * r).b
            bs = biot_savart_field(Z_COIL, d * r, 8192).b
            assert rel_err(dip, bs) < 1.6 * (a / r) ** 2 * 1.05

    def test_on_axis_error_quarters_when_distance_doubles(self):
        errs = []
        for k in (20, 40):
            p = (0, 0, k * Z_COIL.loop_radius)
            errs.append(rel_err(dipole_field(Z_COIL, p).b, biot_savart_field(Z_COIL, p).b))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)


class TestSensorNormal:
    @pytest.mark.parametrize(
        "theta, phi, expected",
        [(0, 0, (0, 0, 1)), (0, math.pi / 2, (1, 0, 0)), (math.pi / 2, math.pi / 2, (0, 1, 0))],
    )
    def test_axis_cases(self, theta, phi, expected):
        n = sensor_normal(Pose5DOF(0, 0, 0.1, theta, phi))
        np.testing.assert_allclose(n, expected, atol=1e-15)

    @settings(max_examples=100)
    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_unit_length(self, theta, phi):
        assert np.linalg.norm(sensor_normal(Pose5DOF(0, 0, 0.1, theta, phi))) == pytest.approx(1.0, abs=1e-12)


class TestForwardModel:
    def test_on_axis_composition(self, sensor):
        coils = tuple(CoilSpec(k, (0.3 * k, 0, 0), (0, 0, 1), 0.5, 20000.0 + 2000 * k) for k in range(5))
        arr = TransmitterArray(coils)
        z = 0.08
        v = forward_model(arr, Pose5DOF(0, 0, z, 0, 0), sensor)
        omega = 2 * math.pi * 20000.0
        assert v[0] == pytest.approx(omega * sensor.turns_area * dipole_on_axis(0.5, z), rel=1e-12)

    def test_orthogonal_normal_gives_zero(self, sensor):
        coils = tuple(CoilSpec(k, (0.3 * k, 0, 0), (0, 0, 1), 0.5, 20000.0 + 2000 * k) for k in range(5))
        arr = TransmitterArray(coils)
        # on the axis of coil 0 the field is along z, so an x-pointing sensor sees nothing
        v = forward_model(arr, Pose5DOF(0, 0, 0.08, 0, math.pi / 2), sensor)
        aligned = forward_model(arr, Pose5DOF(0, 0, 0.08, 0, 0), sensor)
        assert abs(v[0]) < 1e-12 * abs(aligned[0])

    def test_calibration_scale_multiplies(self, sensor):
        base = default_array()
        scaled = TransmitterArray(tuple(
            CoilSpec(c.id, c.center, c.axis, c.moment_magnitude, c.frequency, c.loop_radius, 1.5 if c.id == 2 else 1.0)
            for c in base.coils))
        pose = Pose5DOF(0.01, 0.02, 0.1, 0.3, 0.4)
        v0, v1 = forward_model(base, pose, sensor), forward_model(scaled, pose, sensor)
        assert v1[2] == pytest.approx(1.5 * v0[2], rel=1e-14)
        np.testing.assert_array_equal(np.delete(v1, 2), np.delete(v0, 2))

    def test_matches_per_coil_dipole_fields(self, array, sensor, rng):
        for _ in range(20):
            pose = Pose5DOF(*rng.uniform([-0.2, -0.2, 0.03], [0.2, 0.2, 0.3]), rng.uniform(-3, 3), rng.uniform(0, 3))
            n = sensor_normal(pose)
            expected = [
                2 * math.pi * c.frequency * sensor.turns_area * (dipole_field(c, pose.position).b @ n)
                for c in array.coils
            ]
            np.testing.assert_allclose(forward_model(array, pose, sensor), expected, rtol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.floats(0.03, 0.3), st.floats(-3.14, 3.14), st.floats(0, 3.14))
    def test_sign_antisymmetry(self, x, y, z, theta, phi):
        array, sensor = default_array(), SensorSpec()
        pose = Pose5DOF(x, y, z, theta, phi)
        v = forward_model(array, pose, sensor)
        v_flip = forward_model(array, pose.flipped(), sensor)
        np.testing.assert_allclose(v_flip, -v, rtol=1e-12, atol=1e-18)

    def test_batch_matches_single(self, array, sensor, rng):
        params = np.column_stack([rng.uniform(-0.1, 0.1, 10), rng.uniform(-0.1, 0.1, 10), rng.uniform(0.05, 0.2, 10),
                                  rng.uniform(-3, 3, 10), rng.uniform(0, 1.5, 10)])
        batch = forward_model_batch(array, params, sensor)
        for row, p in zip(batch, params):
            np.testing.assert_array_equal(row, forward_model(array, Pose5DOF.from_array(p), sensor))

    def test_singular_point_propagates(self, array, sensor):
        with pytest.raises(SingularPoint):
            forward_model(array, Pose5DOF(0.07, 0.07, 0.0, 0, 0), sensor)
