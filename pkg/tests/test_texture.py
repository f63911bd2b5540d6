import math

import numpy as np
import pytest

from railtex import (
    FeatureConfig,
    Glcm,
    angle_to_offset,
    compute_glcm,
    extract_features,
    feature_schema,
    first_order_stats,
    glcm_contrast,
    glcm_correlation,
    glcm_energy,
    glcm_entropy,
    glcm_homogeneity,
    quantize,
)
from railtex.errors import InvalidParameterError
from railtex.texture import ANGLES

from conftest import random_gray


# ---------------------------------------------------------------------------
# independent oracles: plain pair enumeration and double-loop formulas
# ---------------------------------------------------------------------------

def glcm_brute_force(raster, dx, dy, levels, symmetric):
    h, w = raster.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            x2, y2 = x + dx, y + dy
            if 0 <= x2 < w and 0 <= y2 < h:
                counts[raster[y, x], raster[y2, x2]] += 1
                if symmetric:
                    counts[raster[y2, x2], raster[y, x]] += 1
    return counts


def contrast_loop(p):
    return sum((i - j) ** 2 * p[i, j] for i in range(p.shape[0]) for j in range(p.shape[1]))


def energy_loop(p):
    return sum(p[i, j] ** 2 for i in range(p.shape[0]) for j in range(p.shape[1]))


def homogeneity_loop(p):
    return sum(p[i, j] / (1 + abs(i - j)) for i in range(p.shape[0]) for j in range(p.shape[1]))


def entropy_loop(p):
    return -sum(p[i, j] * math.log(p[i, j]) for i in range(p.shape[0]) for j in range(p.shape[1]) if p[i, j] > 0)


def correlation_loop(p):
    g = p.shape[0]
    marg = p.sum(axis=1)
    mu = sum(i * marg[i] for i in range(g))
    var = sum((i - mu) ** 2 * marg[i] for i in range(g))
    if var < 1e-12:
        return 0.0
    return sum((i - mu) * (j - mu) * p[i, j] for i in range(g) for j in range(g)) / var


def make_glcm(p, symmetric=True):
    p = np.asarray(p, dtype=np.float64)
    counts = np.round(p * 1000).astype(np.int64)
    return Glcm(levels=p.shape[0], counts=counts, probs=p, offset=(1, 0), symmetric=symmetric)


def random_normalized_glcm(rng, g, symmetric=True):
    m = rng.random((g, g))
    if symmetric:
        m = m + m.T
    return make_glcm(m / m.sum(), symmetric=symmetric)


class TestQuantize:
    def test_identity_at_256(self, rng):
        img = random_gray(rng, 6, 6)
        assert (quantize(img, 256) == img).all()

    def test_endpoints(self):
        img = np.array([[0, 255]], dtype=np.uint8)
        q = quantize(img, 32)
        assert q[0, 0] == 0 and q[0, 1] == 31

    def test_midscale(self):
        assert quantize(np.array([[128]], dtype=np.uint8), 32)[0, 0] == 16

    def test_preserves_order(self, rng):
        img = random_gray(rng, 8, 8)
        q = quantize(img, 16)
        flat_v, flat_q = img.ravel(), q.ravel()
        for a in range(flat_v.size):
            for b in range(flat_v.size):
                if flat_v[a] < flat_v[b]:
                    assert flat_q[a] <= flat_q[b]

    def test_bad_levels(self, rng):
        with pytest.raises(InvalidParameterError):
            quantize(random_gray(rng, 4, 4), 1)


class TestAngleToOffset:
    def test_all_four(self):
        assert angle_to_offset(0) == (1, 0)
        assert angle_to_offset(45) == (1, -1)
        assert angle_to_offset(90) == (0, -1)
        assert angle_to_offset(135) == (-1, -1)

    def test_distance_scales(self):
        assert angle_to_offset(45, 3) == (3, -3)

    def test_unsupported(self):
        with pytest.raises(InvalidParameterError):
            angle_to_offset(30)


class TestComputeGlcm:
    def test_worked_example(self):
        q = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 2, 2, 2], [2, 2, 3, 3]])
        g = compute_glcm(q, 1, 0, 4, symmetric=False)
        expected = {(0, 0): 2, (0, 1): 2, (1, 1): 2, (0, 2): 1, (2, 2): 3, (2, 3): 1, (3, 3): 1}
        assert g.counts.sum() == 12
        for (i, j), n in expected.items():
            assert g.counts[i, j] == n
        untouched = g.counts.copy()
        for (i, j) in expected:
            untouched[i, j] = 0
        assert untouched.sum() == 0

    def test_constant_raster_single_cell(self):
        g = compute_glcm(np.full((4, 4), 2), 1, 0, 4)
        assert g.probs[2, 2] == 1.0 and g.probs.sum() == 1.0

    def test_offset_exceeds_image(self):
        with pytest.raises(InvalidParameterError):
            compute_glcm(np.zeros((1, 1), dtype=int), 1, 0, 2)

    def test_zero_offset(self):
        with pytest.raises(InvalidParameterError):
            compute_glcm(np.zeros((3, 3), dtype=int), 0, 0, 2)

    def test_matches_brute_force_all_angles(self, rng):
        for _ in range(60):
            levels = int(rng.integers(2, 17))
            h = int(rng.integers(2, 33))
            w = int(rng.integers(2, 33))
            raster = rng.integers(0, levels, size=(h, w))
            symmetric = bool(rng.integers(0, 2))
            for angle in ANGLES:
                dx, dy = angle_to_offset(angle)
                got = compute_glcm(raster, dx, dy, levels, symmetric=symmetric)
                assert (got.counts == glcm_brute_force(raster, dx, dy, levels, symmetric)).all()

    def test_symmetric_counts_equal_transpose(self, rng):
        raster = rng.integers(0, 8, size=(16, 16))
        g = compute_glcm(raster, 1, -1, 8, symmetric=True)
        assert (g.counts == g.counts.T).all()

    def test_probs_normalized(self, rng):
        raster = rng.integers(0, 5, size=(10, 10))
        g = compute_glcm(raster, -1, -1, 5)
        assert abs(g.probs.sum() - 1.0) < 1e-12


class TestFeatureFormulas:
    def test_contrast_examples(self):
        const = make_glcm([[1.0, 0.0], [0.0, 0.0]])
        assert glcm_contrast(const) == 0.0
        two = make_glcm([[0.0, 0.5], [0.5, 0.0]])
        assert abs(glcm_contrast(two) - 1.0) < 1e-12

    def test_contrast_worked_example_unsymmetric(self):
        q = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 2, 2, 2], [2, 2, 3, 3]])
        g = compute_glcm(q, 1, 0, 4, symmetric=False)
        assert abs(glcm_contrast(g) - 7.0 / 12.0) < 1e-12

    def test_correlation_examples(self):
        assert glcm_correlation(make_glcm([[1.0, 0.0], [0.0, 0.0]])) == 0.0  # degenerate
        assert abs(glcm_correlation(make_glcm([[0.5, 0.0], [0.0, 0.5]])) - 1.0) < 1e-12
        assert abs(glcm_correlation(make_glcm([[0.0, 0.5], [0.5, 0.0]])) + 1.0) < 1e-12

    def test_correlation_rejects_asymmetric(self):
        g = make_glcm([[0.25, 0.5], [0.0, 0.25]], symmetric=False)
        with pytest.raises(InvalidParameterError):
            glcm_correlation(g)

    def test_energy_examples(self):
        assert glcm_energy(make_glcm([[1.0, 0.0], [0.0, 0.0]])) == 1.0
        assert abs(glcm_energy(make_glcm([[0.5, 0.0], [0.0, 0.5]])) - 0.5) < 1e-12
        assert abs(glcm_energy(make_glcm([[0.25, 0.25], [0.25, 0.25]])) - 0.25) < 1e-12

    def test_homogeneity_examples(self):
        assert glcm_homogeneity(make_glcm([[1.0, 0.0], [0.0, 0.0]])) == 1.0
        assert abs(glcm_homogeneity(make_glcm([[0.0, 0.5], [0.5, 0.0]])) - 0.5) < 1e-12
        p = np.zeros((3, 3))
        p[0, 2] = 1.0
        assert abs(glcm_homogeneity(make_glcm(p, symmetric=False)) - 1.0 / 3.0) < 1e-12

    def test_entropy_examples(self):
        assert glcm_entropy(make_glcm([[1.0, 0.0], [0.0, 0.0]])) == 0.0
        assert abs(glcm_entropy(make_glcm([[0.5, 0.0], [0.0, 0.5]])) - math.log(2)) < 1e-12
        assert abs(glcm_entropy(make_glcm([[0.25, 0.25], [0.25, 0.25]])) - math.log(4)) < 1e-12

    def test_all_match_double_loop_oracles(self, rng):
        for _ in range(120):
            g_levels = int(rng.integers(2, 9))
            glcm = random_normalized_glcm(rng, g_levels)
            p = glcm.probs
            assert abs(glcm_contrast(glcm) - contrast_loop(p)) < 1e-12
            assert abs(glcm_energy(glcm) - energy_loop(p)) < 1e-12
            assert abs(glcm_homogeneity(glcm) - homogeneity_loop(p)) < 1e-12
            assert abs(glcm_entropy(glcm) - entropy_loop(p)) < 1e-12
            assert abs(glcm_correlation(glcm) - correlation_loop(p)) < 1e-12

    def test_feature_ranges(self, rng):
        for _ in range(50):
            glcm = random_normalized_glcm(rng, int(rng.integers(2, 9)))
            assert glcm_contrast(glcm) >= 0
            assert 0 < glcm_energy(glcm) <= 1
            assert 0 < glcm_homogeneity(glcm) <= 1
            assert 0 <= glcm_entropy(glcm) <= 2 * math.log(glcm.levels) + 1e-12
            assert -1 - 1e-12 <= glcm_correlation(glcm) <= 1 + 1e-12

    def test_unnormalized_rejected(self):
        g = make_glcm([[0.5, 0.0], [0.0, 0.0]])
        with pytest.raises(InvalidParameterError):
            glcm_contrast(g)


class TestFirstOrderStats:
    def test_constant(self):
        s = first_order_stats(np.full((5, 5), 17, dtype=np.uint8))
        assert s.mean == 17 and s.std == 0 and s.smoothness == 0
        assert s.skewness == 0 and s.uniformity == 1 and s.entropy == 0

    def test_two_point(self):
        img = np.zeros((2, 4), dtype=np.uint8)
        img[1] = 255
        s = first_order_stats(img)
        assert abs(s.mean - 127.5) < 1e-12
        assert abs(s.std - 127.5) < 1e-12

    def test_uniform_histogram(self):
        img = np.arange(256, dtype=np.uint8).reshape(16, 16)
        s = first_order_stats(img)
        assert abs(s.uniformity - 1 / 256) < 1e-15
        assert abs(s.entropy - math.log(256)) < 1e-12


class TestExtractFeatures:
    def test_per_angle_schema_length(self, rng):
        fv = extract_features(random_gray(rng, 16, 16), FeatureConfig())
        assert len(fv.values) == len(fv.schema) == 4 * 5 + 6
        assert fv.schema[0] == "contrast@0"
        assert fv.schema[-6:] == ("fo_mean", "fo_std", "fo_smoothness", "fo_skewness", "fo_uniformity", "fo_entropy")

    def test_averaged_schema_length(self, rng):
        fv = extract_features(random_gray(rng, 16, 16), FeatureConfig(angle_mode="averaged"))
        assert len(fv.values) == 5 + 6

    def test_constant_image_feature_values(self):
        fv = extract_features(np.full((12, 12), 40, dtype=np.uint8), FeatureConfig(angle_mode="averaged"))
        by_name = dict(zip(fv.schema, fv.values))
        assert by_name["contrast"] == 0.0
        assert by_name["energy"] == 1.0
        assert by_name["homogeneity"] == 1.0
        assert by_name["entropy"] == 0.0
        assert by_name["correlation"] == 0.0  # degenerate convention
        assert by_name["fo_std"] == 0.0

    def test_deterministic(self, rng):
        img = random_gray(rng, 20, 20)
        a = extract_features(img, FeatureConfig())
        b = extract_features(img, FeatureConfig())
        assert (a.values == b.values).all()

    def test_rotation_permutes_angles(self, rng):
        cfg = FeatureConfig(levels=8)
        starts = {0: 0, 45: 5, 90: 10, 135: 15}

        def block(fv, angle):
            return fv.values[starts[angle] : starts[angle] + 5]

        for _ in range(10):
            img = random_gray(rng, int(rng.integers(8, 24)), int(rng.integers(8, 24)))
            f = extract_features(img, cfg)
            fr = extract_features(np.rot90(img).copy(), cfg)
            assert (block(f, 0) == block(fr, 90)).all()
            assert (block(f, 90) == block(fr, 0)).all()
            assert (block(f, 45) == block(fr, 135)).all()
            assert (block(f, 135) == block(fr, 45)).all()

    def test_multi_distance_schema(self, rng):
        cfg = FeatureConfig(distances=(1, 2))
        schema = feature_schema(cfg)
        assert "contrast@0" in schema and "contrast@0:d2" in schema
        fv = extract_features(random_gray(rng, 16, 16), cfg)
        assert len(fv.values) == 2 * 20 + 6
