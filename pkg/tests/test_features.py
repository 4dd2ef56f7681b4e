import numpy as np
import pytest

from mmreg.features import (
    FeatureMap,
    FeatureStack,
    detect_fast,
    detect_harris,
    grid_centers,
    grid_to_image,
    z_normalize,
)


def fmap(values, scale_id=0):
    return FeatureMap(scale_id=scale_id, values=np.asarray(values, dtype=np.float64))


class TestZNormalize:
    def test_three_values(self):
        m = z_normalize(fmap([[[1.0, 2.0, 3.0]]]))
        expected = (np.array([1.0, 2.0, 3.0]) - 2.0) / np.sqrt(2.0 / 3.0)
        assert np.allclose(m.values.ravel(), expected, atol=1e-12)
        assert m.values.ravel()[0] == pytest.approx(-1.2247, abs=1e-4)

    def test_constant_channel_becomes_zero(self):
        m = z_normalize(fmap(np.full((1, 2, 2), 5.0)))
        assert (m.values == 0.0).all()

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        m = fmap(rng.normal(3.0, 2.0, (4, 6, 6)))
        once = z_normalize(m)
        twice = z_normalize(once)
        assert np.allclose(once.values, twice.values, atol=1e-9)

    def test_channel_statistics(self):
        rng = np.random.default_rng(1)
        m = z_normalize(fmap(rng.uniform(0, 10, (3, 7, 5))))
        for c in range(3):
            ch = m.values[c]
            assert abs(ch.mean()) < 1e-6
            assert abs(ch.std() - 1.0) < 1e-6


class TestGridToImage:
    def test_corner_cells(self):
        assert grid_to_image((28, 28), (0, 0), (224, 224)) == (4.0, 4.0)
        assert grid_to_image((7, 7), (6, 6), (224, 224)) == (208.0, 208.0)

    def test_interior_cell(self):
        assert grid_to_image((14, 14), (7, 3), (224, 224)) == (120.0, 56.0)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            grid_to_image((4, 4), (4, 0), (64, 64))

    def test_centers_injective_and_inside(self):
        pts = grid_centers(9, 5, 100, 60)
        assert pts.shape == (45, 2)
        assert len({(x, y) for x, y in pts}) == 45
        assert (pts[:, 0] > 0).all() and (pts[:, 0] < 100).all()
        assert (pts[:, 1] > 0).all() and (pts[:, 1] < 60).all()


def square_image(size, lo, hi, value=255):
    img = np.zeros((size, size), dtype=np.uint8)
    img[lo : hi + 1, lo : hi + 1] = value
    return img


class TestHarris:
    def test_square_corners(self):
        img = square_image(64, 20, 43)
        pts, resp = detect_harris(img, max_points=4)
        assert len(pts) == 4
        corners = [(20, 20), (43, 20), (20, 43), (43, 43)]
        for cx, cy in corners:
            d = np.sqrt(((pts - [cx, cy]) ** 2).sum(axis=1)).min()
            assert d <= 2.0

    def test_constant_image_empty(self):
        pts, resp = detect_harris(np.full((32, 32), 77, dtype=np.uint8))
        assert len(pts) == 0 and len(resp) == 0

    def test_max_points_truncates_to_strongest(self):
        img = square_image(64, 20, 43)
        all_pts, all_resp = detect_harris(img, max_points=100)
        one_pt, one_resp = detect_harris(img, max_points=1)
        assert len(one_pt) == 1
        assert one_resp[0] == all_resp[0]

    def test_sorted_nonincreasing_and_deterministic(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, (48, 48), dtype=np.uint8)
        pts1, resp1 = detect_harris(img)
        pts2, resp2 = detect_harris(img)
        assert np.array_equal(pts1, pts2) and np.array_equal(resp1, resp2)
        assert (np.diff(resp1) <= 0).all()
        assert (resp1 > 0).all()

    def test_k_validation(self):
        with pytest.raises(ValueError, match="harris k"):
            detect_harris(np.zeros((8, 8), dtype=np.uint8), k=0.3)

    def test_rejects_rgb(self):
        with pytest.raises(ValueError, match="grayscale"):
            detect_harris(np.zeros((8, 8, 3), dtype=np.uint8))


class TestFast:
    def test_small_square_corners(self):
        img = square_image(32, 14, 18)
        pts, resp = detect_fast(img, intensity_threshold=20)
        assert len(pts) >= 1
        corners = np.array([(14, 14), (18, 14), (14, 18), (18, 18)])
        for p in pts:
            d = np.sqrt(((corners - p) ** 2).sum(axis=1)).min()
            assert d <= 3.0

    def test_constant_image_empty(self):
        pts, _ = detect_fast(np.full((32, 32), 90, dtype=np.uint8))
        assert len(pts) == 0

    def test_threshold_255_empty(self):
        img = square_image(32, 10, 20)
        pts, _ = detect_fast(img, intensity_threshold=255)
        assert len(pts) == 0

    def test_sorted_and_truncated(self):
        rng = np.random.default_rng(3)
        img = (rng.random((40, 40)) < 0.1).astype(np.uint8) * 255
        pts, resp = detect_fast(img, intensity_threshold=30, max_points=5)
        assert len(pts) <= 5
        assert (np.diff(resp) <= 0).all()


class TestStackValidation:
    def test_needs_maps(self):
        with pytest.raises(ValueError, match="at least one map"):
            FeatureStack(source_w=10, source_h=10, maps=())

    def test_unknown_scale(self):
        stack = FeatureStack(source_w=10, source_h=10, maps=(fmap(np.zeros((1, 2, 2))),))
        with pytest.raises(ValueError, match="unknown scale id"):
            stack.by_scale(9)
