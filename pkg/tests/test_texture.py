import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import (
    naive_collage_vc,
    naive_five_stats,
    naive_glcm,
    naive_haralick13,
    naive_haralick_maps,
    naive_orientation_energy,
    naive_vh,
)
from pavetex import texture
from pavetex.errors import DegenerateInput
from pavetex.imaging import quantize
from pavetex.texture import (
    FEATURE_DIM,
    FeatureParams,
    altrep_va,
    collage_vc,
    dominant_orientation_map,
    extract_fs,
    feature_names,
    five_stats,
    fourier_stats,
    glcm,
    gradient_field,
    haralick13,
    haralick_maps,
    haralick_vh,
    histogram_peaks,
    quantize_orientations,
    range_filter,
    range_filter_stats,
)


def seeded_patch(seed, shape=(32, 32), high=256):
    return np.random.default_rng(seed).integers(0, high, shape).astype(np.uint8)


class TestGlcm:
    def test_two_by_two_uniform_rows(self):
        # [[0,0],[1,1]] with offset (0,1): pairs (0,0) and (1,1)
        p = glcm(np.array([[0, 0], [1, 1]]), offsets=((0, 1),), levels=2)
        assert p[0, 0] == pytest.approx(0.5)
        assert p[1, 1] == pytest.approx(0.5)
        assert p[0, 1] == p[1, 0] == 0.0

    def test_two_by_two_checkerboard(self):
        p = glcm(np.array([[0, 1], [1, 0]]), offsets=((0, 1),), levels=2)
        assert p[0, 1] == pytest.approx(0.5)
        assert p[1, 0] == pytest.approx(0.5)

    def test_constant_patch_single_diagonal(self):
        q = np.full((5, 5), 3, dtype=np.int64)
        p = glcm(q, levels=16)
        assert p[3, 3] == pytest.approx(1.0)
        assert p.sum() == pytest.approx(1.0)

    def test_matches_naive(self):
        q = quantize(seeded_patch(7, (9, 11)), 16)
        p = glcm(q, levels=16)
        assert np.abs(p - naive_glcm(q, 16)).max() < 1e-12

    def test_too_small(self):
        with pytest.raises(DegenerateInput):
            glcm(np.array([[1]]))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_normalized_and_symmetric(self, seed):
        q = quantize(seeded_patch(seed, (8, 8)), 16)
        p = glcm(q, levels=16)
        assert (p >= 0).all()
        assert abs(p.sum() - 1.0) < 1e-12
        assert np.abs(p - p.T).max() < 1e-12


class TestHaralick13:
    def test_against_naive(self):
        q = quantize(seeded_patch(11, (12, 12)), 16)
        p = glcm(q, levels=16)
        assert np.abs(haralick13(p) - naive_haralick13(p)).max() < 1e-10

    def test_two_by_two_example(self):
        p = glcm(np.array([[0, 0], [1, 1]]), levels=2)
        assert np.abs(haralick13(p) - naive_haralick13(p)).max() < 1e-12

    def test_single_entry_entropy_zero(self):
        p = np.zeros((16, 16))
        p[4, 4] = 1.0
        h = haralick13(p)
        assert h[8] == 0.0  # entropy
        assert h[0] == pytest.approx(1.0)  # energy

    def test_entropy_positive_iff_multiple_entries(self):
        q = quantize(seeded_patch(2, (6, 6)), 16)
        h = haralick13(glcm(q, levels=16))
        assert h[8] > 0.0
        assert 0.0 < h[0] <= 1.0

    def test_length(self):
        assert len(haralick13(np.eye(4) / 4)) == 13


class TestHaralickMaps:
    def test_matches_naive_window5(self):
        q = quantize(seeded_patch(16, (16, 16)), 16)
        got = haralick_maps(q, 16, 5)
        want = naive_haralick_maps(q, 16, 5)
        assert np.abs(got - want).max() < 1e-9

    def test_matches_naive_nonsquare(self):
        q = quantize(seeded_patch(17, (15, 19)), 16)
        got = haralick_maps(q, 16, 11)
        want = naive_haralick_maps(q, 16, 11)
        assert got.shape == (13, 5, 9)
        assert np.abs(got - want).max() < 1e-9

    def test_window_too_large(self):
        with pytest.raises(DegenerateInput):
            haralick_maps(np.zeros((4, 4), dtype=np.uint8), 16, 5)

    def test_even_window(self):
        with pytest.raises(DegenerateInput):
            haralick_maps(np.zeros((8, 8), dtype=np.uint8), 16, 4)


class TestHaralickVh:
    def test_constant_patch_entropy_zero(self):
        v = haralick_vh(np.full((16, 16), 90, dtype=np.uint8))
        assert v[8] == 0.0
        assert len(v) == 13

    def test_equals_mean_of_naive_maps(self):
        p = seeded_patch(23, (16, 16))
        assert np.abs(haralick_vh(p) - naive_vh(p)).max() < 1e-9


class TestGradients:
    def test_constant_zero(self):
        gx, gy = gradient_field(np.full((6, 6), 9.0))
        assert (gx == 0).all() and (gy == 0).all()

    def test_exact_on_affine(self):
        r, c = np.meshgrid(np.arange(10), np.arange(12), indexing="ij")
        plane = 3.0 * c - 2.0 * r + 5.0
        gx, gy = gradient_field(plane)
        assert np.abs(gx - 3.0).max() < 1e-12
        assert np.abs(gy - (-2.0)).max() < 1e-12

    def test_too_small(self):
        with pytest.raises(DegenerateInput):
            gradient_field(np.zeros((2, 5)))


class TestOrientation:
    def test_vertical_stripes_theta_zero(self):
        # intensity varies only with column -> gradient along X -> theta ~ 0
        p = np.tile(np.arange(16, dtype=np.float64) ** 2, (16, 1))
        gx, gy = gradient_field(p)
        theta, degenerate = dominant_orientation_map(gx, gy, 5)
        assert not degenerate.any()
        assert np.abs(theta).max() < 1e-9

    def test_rotated_stripes_theta_pi_half(self):
        p = np.tile(np.arange(16, dtype=np.float64) ** 2, (16, 1)).T
        gx, gy = gradient_field(p)
        theta, _ = dominant_orientation_map(gx, gy, 5)
        assert np.abs(theta - np.pi / 2).max() < 1e-9

    def test_rotation_commutes(self):
        p = seeded_patch(31, (14, 14)).astype(np.float64)
        gx, gy = gradient_field(p)
        theta, deg = dominant_orientation_map(gx, gy, 5)
        pr = np.rot90(p)
        gxr, gyr = gradient_field(pr)
        theta_r, deg_r = dominant_orientation_map(gxr, gyr, 5)
        shifted = np.mod(theta + np.pi / 2, np.pi)
        mask = ~(deg | np.rot90(deg_r, -1))
        diff = np.abs(np.rot90(theta_r, -1) - shifted)
        diff = np.minimum(diff, np.pi - diff)  # orientation is mod pi
        assert diff[mask].max() < 1e-8

    def test_range_and_degenerate(self):
        gx = np.zeros((8, 8))
        gy = np.zeros((8, 8))
        theta, degenerate = dominant_orientation_map(gx, gy, 3)
        assert degenerate.all()
        assert (theta == 0).all()

    def test_principal_axis_energy(self):
        p = seeded_patch(37, (12, 12)).astype(np.float64)
        gx, gy = gradient_field(p)
        theta, _ = dominant_orientation_map(gx, gy, 5)
        energy, top = naive_orientation_energy(gx, gy, 5, theta)
        assert np.abs(energy - top).max() < 1e-6
        assert (theta >= 0).all() and (theta < np.pi).all()


class TestQuantizeOrientations:
    def test_bins(self):
        theta = np.array([[0.0, np.pi / 2, np.pi - 1e-12]])
        q = quantize_orientations(theta, 16)
        assert q[0, 0] == 0
        assert q[0, 1] == 8
        assert q[0, 2] == 15


class TestCollage:
    def test_length_and_finite(self):
        v = collage_vc(seeded_patch(41, (16, 16)))
        assert v.shape == (65,)
        assert np.isfinite(v).all()

    def test_constant_patch_entropy_stats_zero(self):
        v = collage_vc(np.full((16, 16), 100, dtype=np.uint8))
        # entropy is feature 8; its [mean, median, std] slots are all zero
        ent = v[8 * 5 : 8 * 5 + 3]
        assert (ent == 0).all()

    def test_matches_naive(self):
        p = seeded_patch(43, (16, 16))
        assert np.abs(collage_vc(p) - naive_collage_vc(p)).max() < 1e-9

    def test_stripes_vs_noise_entropy(self):
        stripes = np.tile(
            (np.arange(32) % 8 * 30).astype(np.uint8), (32, 1)
        )
        noise = seeded_patch(47, (32, 32))
        ent_mean = lambda p: collage_vc(p)[8 * 5]  # noqa: E731
        assert ent_mean(noise) > ent_mean(stripes)


class TestHistogramPeaks:
    def test_constant_patch(self):
        peaks = histogram_peaks(np.full((100, 100), 77, dtype=np.uint8))
        assert peaks == [(77, 10000)]

    def test_half_half(self):
        p = np.zeros((100, 100), dtype=np.uint8)
        p[50:] = 255
        assert histogram_peaks(p) == [(0, 5000), (255, 5000)]

    def test_separation_suppression(self):
        # two clusters 30 levels apart, both above threshold -> 1 peak
        p = np.zeros((100, 100), dtype=np.uint8)
        p[:, :50] = 50
        p[:, 50:] = 80
        assert len(histogram_peaks(p)) == 1

    def test_tie_prefers_lower_index(self):
        p = np.empty((20, 40), dtype=np.uint8)
        p[:, :20] = 10
        p[:, 20:] = 40
        peaks = histogram_peaks(p, min_height=200, min_separation=60)
        assert peaks == [(10, 400)]


class TestFourier:
    def test_dc_equals_mean(self):
        p = seeded_patch(53, (17, 23)).astype(np.float64)
        m, n = p.shape
        mag = np.abs(np.fft.fft2(p)) / (m * n)
        assert abs(mag[0, 0] - p.mean()) < 1e-9

    def test_matches_full_fft(self):
        for shape in ((8, 8), (9, 8), (8, 9), (7, 7)):
            p = seeded_patch(59, shape).astype(np.float64)
            m, n = shape
            full = np.sort(np.abs(np.fft.fft2(p)).ravel()) / (m * n)
            got = fourier_stats(p)
            want = np.array(
                [full.mean(), float(np.median(full)), naive_five_stats(full)[3]]
            )
            assert np.abs(got - want).max() < 1e-9

    def test_cosine_two_nonzero_magnitudes(self):
        n = 8
        k = 2
        col = np.cos(2 * np.pi * k * np.arange(n) / n)
        p = np.tile(col, (n, 1))
        mag = np.abs(np.fft.fft2(p)) / (n * n)
        nz = np.argwhere(mag > 1e-9)
        assert len(nz) == 2
        assert {tuple(r) for r in nz} == {(0, k), (0, n - k)}

    def test_too_small(self):
        with pytest.raises(DegenerateInput):
            fourier_stats(np.zeros((1, 5)))


class TestRangeFilter:
    def test_constant_zero(self):
        assert (range_filter(np.full((10, 10), 9.0)) == 0).all()

    def test_checkerboard_255(self):
        p = np.indices((12, 12)).sum(axis=0) % 2 * 255
        r = range_filter(p)
        assert (r == 255).all()
        stats = range_filter_stats(p)
        assert stats[0] == pytest.approx(255.0)
        assert stats[2] == 0.0  # std

    def test_single_bright_pixel(self):
        p = np.zeros((9, 9))
        p[4, 4] = 200.0
        r = range_filter(p)
        expect = np.zeros((9, 9))
        expect[3:6, 3:6] = 200.0
        assert (r == expect).all()

    def test_matches_brute_force(self):
        p = seeded_patch(61, (10, 13)).astype(np.float64)
        r = range_filter(p)
        pad = np.pad(p, 1, mode="edge")
        for i in range(10):
            for j in range(13):
                w = pad[i : i + 3, j : j + 3]
                assert r[i, j] == w.max() - w.min()


class TestFiveStats:
    def test_constant_zero(self):
        s = five_stats(np.full(50, 3.25))
        assert s[0] == pytest.approx(3.25)
        assert (s[2:] == 0).all()

    @given(
        x=arrays(
            np.float64,
            st.integers(2, 40),
            elements=st.floats(-100, 100, allow_nan=False),
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_matches_naive(self, x):
        assert np.abs(five_stats(x) - naive_five_stats(x)).max() < 1e-8


class TestAltRep:
    def test_constant_patch(self):
        v = altrep_va(np.full((100, 100), 42, dtype=np.uint8))
        assert v[0] == 1.0  # peak_count
        assert v[1] == 0.0  # spacing
        assert v[12] == 0.0  # intensity std
        assert v[15] == 0.0  # histogram entropy

    def test_half_half_patch(self):
        p = np.zeros((100, 100), dtype=np.uint8)
        p[:50] = 255
        v = altrep_va(p)
        assert v[0] == 2.0
        assert v[1] == 255.0
        assert v[10] == pytest.approx(127.5)  # intensity mean

    def test_length_and_finite(self):
        v = altrep_va(seeded_patch(67, (64, 64)))
        assert v.shape == (16,)
        assert np.isfinite(v).all()

    def test_peak_threshold_scaling(self):
        # 50x50 patch: threshold scales to 200 * (50/500)^2 = 2, so a lone
        # 100-count peak qualifies
        p = np.full((50, 50), 9, dtype=np.uint8)
        v = altrep_va(p)
        assert v[0] == 1.0

    def test_component_consistency(self):
        p = seeded_patch(71, (64, 64))
        v = altrep_va(p)
        peaks = histogram_peaks(p, 200.0 * (64 / 500) ** 2, 60)
        assert v[0] == len(peaks)
        assert np.abs(v[2:5] - fourier_stats(p.astype(np.float64))).max() < 1e-12
        assert np.abs(v[5:10] - range_filter_stats(p)).max() < 1e-12
        assert v[10] == pytest.approx(p.mean())
        assert v[11] == pytest.approx(np.median(p))
        assert v[12] == pytest.approx(p.std())


class TestExtractFs:
    def test_length_and_order(self):
        p = seeded_patch(73, (64, 64))
        fv = extract_fs(p)
        assert fv.fs.shape == (FEATURE_DIM,)
        assert np.isfinite(fv.fs).all()
        assert np.array_equal(fv.fs[:16], fv.v_a)
        assert np.array_equal(fv.fs[16:29], fv.v_h)
        assert np.array_equal(fv.fs[29:], fv.v_c)

    def test_component_oracles(self):
        p = seeded_patch(79, (64, 64))
        fv = extract_fs(p)
        assert np.abs(fv.v_a - altrep_va(p)).max() == 0.0
        assert np.abs(fv.v_h - haralick_vh(p)).max() == 0.0
        assert np.abs(fv.v_c - collage_vc(p)).max() == 0.0

    def test_no_nan_on_degenerate(self):
        for p in (
            np.zeros((32, 32), dtype=np.uint8),
            np.full((32, 32), 255, dtype=np.uint8),
        ):
            assert np.isfinite(extract_fs(p).fs).all()

    def test_translation_invariance_on_wrapped_texture(self):
        # content periodic with the patch, shifted by arbitrary offsets: the
        # symmetric pair multiset (and so GLCM/energy) must be stable
        base = (np.indices((40, 40)).sum(axis=0) % 2) * 12 + 2
        for dr, dc in ((1, 4), (5, 9), (0, 1)):
            a = base[:17, :17]
            b = base[dr : dr + 17, dc : dc + 17]
            ea = haralick13(glcm(a, levels=16))[0]
            eb = haralick13(glcm(b, levels=16))[0]
            assert abs(ea - eb) < 1e-6

    def test_feature_names(self):
        names = feature_names()
        assert len(names) == FEATURE_DIM
        assert names[0] == "peak_count"
        assert names[16] == "haralick_energy"
        assert names[29] == "collage_energy_mean"

    def test_custom_params(self):
        p = seeded_patch(89, (40, 40))
        fv = extract_fs(p, FeatureParams(haralick_window=7, collage_window=3))
        assert fv.fs.shape == (FEATURE_DIM,)
