import math

import numpy as np
import pytest

from strawbot.geometry import (
    Pose2,
    Transform,
    angle_diff,
    apply,
    compose,
    invert,
    normalize_angle,
)


def random_transform(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-math.pi, math.pi)
    t = rng.uniform(-2, 2, size=3)
    return Transform.from_axis_angle(axis, angle, t)


def homogeneous(t: Transform) -> np.ndarray:
    return t.as_matrix()


def test_identity_compose_identity():
    i = Transform.identity()
    c = compose(i, i)
    assert np.allclose(c.as_matrix(), np.eye(4), atol=1e-12)


def test_compose_with_inverse_is_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = random_transform(rng)
        assert np.allclose(compose(t, invert(t)).as_matrix(), np.eye(4), atol=1e-9)
        assert np.allclose(compose(invert(t), t).as_matrix(), np.eye(4), atol=1e-9)


def test_compose_rot_z_90_twice():
    # Hand oracle: chain the two 4x4 homogeneous matrices directly.
    t = Transform.from_rot_z(math.pi / 2, translation=(1.0, 0.0, 0.0))
    expected = homogeneous(t) @ homogeneous(t)
    got = compose(t, t)
    assert np.allclose(got.as_matrix(), expected, atol=1e-9)
    assert np.allclose(got.translation, [1.0, 1.0, 0.0], atol=1e-9)
    assert np.allclose(got.rotation_matrix,
                       [[-1, 0, 0], [0, -1, 0], [0, 0, 1]], atol=1e-9)


def test_compose_matches_matrix_oracle_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = random_transform(rng), random_transform(rng)
        assert np.allclose(compose(a, b).as_matrix(),
                           homogeneous(a) @ homogeneous(b), atol=1e-9)


def test_compose_associative():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a, b, c = (random_transform(rng) for _ in range(3))
        left = compose(compose(a, b), c).as_matrix()
        right = compose(a, compose(b, c)).as_matrix()
        assert np.allclose(left, right, atol=1e-9)


def test_invert_identity_and_pure_translation():
    assert np.allclose(invert(Transform.identity()).as_matrix(), np.eye(4))
    t = Transform.from_translation((1.0, 2.0, 3.0))
    assert np.allclose(invert(t).translation, [-1.0, -2.0, -3.0])


def test_invert_matches_matrix_inverse_oracle():
    rng = np.random.default_rng(13)
    for _ in range(100):
        t = random_transform(rng)
        assert np.allclose(invert(t).as_matrix(), np.linalg.inv(t.as_matrix()),
                           atol=1e-9)


def test_apply_identity_and_axis_rotation():
    p = np.array([1.0, 2.0, 3.0])
    assert np.allclose(apply(Transform.identity(), p), p)
    r = Transform.from_rot_z(math.pi / 2)
    assert np.allclose(apply(r, [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-9)


def test_apply_batch_matches_homogeneous_oracle():
    rng = np.random.default_rng(17)
    t = random_transform(rng)
    pts = rng.uniform(-3, 3, size=(64, 3))
    hom = np.hstack([pts, np.ones((64, 1))])
    expected = (homogeneous(t) @ hom.T).T[:, :3]
    assert np.allclose(apply(t, pts), expected, atol=1e-9)


def test_apply_compose_equals_nested_apply():
    rng = np.random.default_rng(19)
    for _ in range(50):
        a, b = random_transform(rng), random_transform(rng)
        p = rng.uniform(-2, 2, size=3)
        assert np.allclose(apply(compose(a, b), p), apply(a, apply(b, p)), atol=1e-9)


def test_quaternion_stays_unit():
    rng = np.random.default_rng(23)
    t = Transform.identity()
    for _ in range(200):
        t = compose(t, random_transform(rng))
        assert abs(np.linalg.norm(t.quaternion) - 1.0) < 1e-9


def test_from_matrix_round_trip():
    rng = np.random.default_rng(29)
    for _ in range(50):
        t = random_transform(rng)
        rebuilt = Transform.from_matrix(t.rotation_matrix, t.translation)
        assert np.allclose(rebuilt.as_matrix(), t.as_matrix(), atol=1e-9)
    with pytest.raises(ValueError):
        Transform.from_matrix(np.ones((3, 3)))


def test_pose2_normalization_idempotent():
    p = Pose2(0.0, 0.0, 3 * math.pi + 0.25)
    assert -math.pi < p.theta <= math.pi
    again = Pose2(p.x, p.y, p.theta)
    assert again.theta == p.theta


def test_normalize_angle_boundaries():
    assert normalize_angle(math.pi) == pytest.approx(math.pi)
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(2 * math.pi) == pytest.approx(0.0)
    assert angle_diff(0.1, -0.1) == pytest.approx(0.2)
    assert abs(angle_diff(math.pi - 0.05, -math.pi + 0.05)) == pytest.approx(0.1)


def test_pose2_to_transform_matches_planar_rotation():
    p = Pose2(1.0, 2.0, math.pi / 2)
    t = p.to_transform()
    assert np.allclose(apply(t, [1.0, 0.0, 0.0]), [1.0, 3.0, 0.0], atol=1e-12)
