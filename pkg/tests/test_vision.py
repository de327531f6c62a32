import itertools

import numpy as np
import pytest

from bitech.vision import (
    BinaryImage,
    DegenerateImage,
    GrayImage,
    InvalidText,
    NoDigits,
    OutOfRange,
    Region,
    SegmentSignature,
    TEMPLATES,
    Unrecognized,
    binarize,
    classify_digit,
    digit_signature,
    enhance_contrast,
    erode,
    extract_regions,
    read_pgm,
    recognize_setpoint,
    render_digits,
    write_pgm,
)

from oracles import otsu_reference


def gray(arr):
    return GrayImage(np.asarray(arr, dtype=np.uint8))


def add_salt_pepper(img, p, seed):
    rng = np.random.default_rng(seed)
    px = img.pixels.copy()
    noise = rng.random(px.shape)
    px[noise < p / 2] = 0
    px[(noise >= p / 2) & (noise < p)] = 255
    return GrayImage(px)


class TestEnhanceContrast:
    def test_constant_image_unchanged(self):
        img = gray(np.full((8, 8), 128))
        assert np.array_equal(enhance_contrast(img).pixels, img.pixels)

    def test_two_level_stretches_to_extremes(self):
        arr = np.full((10, 10), 60)
        arr[5:] = 200
        out = enhance_contrast(gray(arr))
        assert set(np.unique(out.pixels)) == {0, 255}

    def test_ramp_matches_affine_map(self):
        arr = np.tile(np.arange(256, dtype=np.uint8), (4, 1))
        out = enhance_contrast(gray(arr))
        lo = np.percentile(arr, 2.0)
        hi = np.percentile(arr, 98.0)
        expected = np.rint(np.clip((arr.astype(float) - lo) * 255.0 / (hi - lo), 0, 255))
        assert np.array_equal(out.pixels, expected.astype(np.uint8))
        assert out.pixels[0, 0] == 0 and out.pixels[0, -1] == 255


class TestBinarize:
    def test_two_level_exactly_recovered(self):
        arr = np.full((10, 10), 255)
        arr[:3] = 0
        mask, t = binarize(gray(arr))
        assert 0 <= t < 255
        assert np.array_equal(mask.bits, arr == 0)

    def test_threshold_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(12):
            # bimodal blobs with noise
            a = rng.normal(70, 12, size=400)
            b = rng.normal(180, 18, size=600)
            arr = np.clip(np.concatenate([a, b]), 0, 255).astype(np.uint8).reshape(25, 40)
            _, t = binarize(gray(arr))
            assert t == otsu_reference(arr.ravel().tolist())

    def test_constant_image_degenerate(self):
        with pytest.raises(DegenerateImage):
            binarize(gray(np.full((5, 5), 7)))

    def test_polarity_flips_for_dark_background(self):
        arr = np.full((10, 10), 20)
        arr[4:6, 4:6] = 240  # light glyph on dark panel
        mask, _ = binarize(gray(arr))
        assert np.array_equal(mask.bits, arr == 240)


class TestErode:
    def test_zero_iterations_identity(self):
        bits = np.zeros((6, 6), dtype=bool)
        bits[2:5, 2:5] = True
        img = BinaryImage(bits)
        assert np.array_equal(erode(img, 0).bits, bits)

    def test_isolated_pixel_removed(self):
        bits = np.zeros((5, 5), dtype=bool)
        bits[2, 2] = True
        assert not erode(BinaryImage(bits), 1).bits.any()

    def test_solid_square_shrinks_by_one(self):
        bits = np.zeros((9, 9), dtype=bool)
        bits[2:7, 2:7] = True
        out = erode(BinaryImage(bits), 1).bits
        expected = np.zeros((9, 9), dtype=bool)
        expected[3:6, 3:6] = True
        assert np.array_equal(out, expected)

    def test_anti_extensive_and_composable(self):
        rng = np.random.default_rng(7)
        bits = rng.random((20, 20)) < 0.6
        one = erode(BinaryImage(bits), 1).bits
        assert not (one & ~bits).any()
        twice = erode(BinaryImage(one), 1).bits
        assert np.array_equal(twice, erode(BinaryImage(bits), 2).bits)


class TestExtractRegions:
    def test_empty_image(self):
        assert extract_regions(BinaryImage(np.zeros((10, 10), dtype=bool))) == []

    def test_two_squares_left_to_right(self):
        bits = np.zeros((10, 20), dtype=bool)
        bits[2:6, 12:16] = True
        bits[3:7, 2:6] = True
        regions = extract_regions(BinaryImage(bits))
        assert [r.bbox[0] for r in regions] == [2, 12]
        assert all(r.pixel_count == 16 for r in regions)

    def test_small_speckle_filtered(self):
        bits = np.zeros((20, 20), dtype=bool)
        bits[5:15, 5:15] = True   # 100 px
        bits[0, 19] = True        # speck below 0.5% of 400 px
        regions = extract_regions(BinaryImage(bits))
        assert len(regions) == 1
        assert regions[0].pixel_count == 100

    def test_rendered_digits_tile_left_to_right(self):
        img = render_digits("26")
        mask, _ = binarize(img)
        regions = extract_regions(mask)
        assert len(regions) == 2
        assert regions[0].bbox[0] + regions[0].bbox[2] <= regions[1].bbox[0]


class TestSignatures:
    def test_solid_block_reads_all_on(self):
        bits = np.zeros((30, 20), dtype=bool)
        bits[3:27, 2:16] = True
        region = Region(bbox=(2, 3, 14, 24), pixel_count=14 * 24, component_id=1)
        sig = digit_signature(BinaryImage(bits), region)
        assert sig.segments == (True,) * 7

    def test_empty_region_reads_all_off(self):
        bits = np.zeros((30, 20), dtype=bool)
        region = Region(bbox=(2, 3, 14, 24), pixel_count=0, component_id=1)
        sig = digit_signature(BinaryImage(bits), region)
        assert sig.segments == (False,) * 7

    @pytest.mark.parametrize("digit", list(range(10)))
    def test_rendered_digit_matches_template(self, digit):
        img = render_digits(str(digit))
        mask, _ = binarize(img)
        regions = extract_regions(mask)
        assert len(regions) == 1
        sig = digit_signature(mask, regions[0])
        assert sig.segments == tuple(bool(b) for b in TEMPLATES[digit])


class TestClassify:
    def test_exact_code(self):
        digit, conf = classify_digit(SegmentSignature(TEMPLATES[4]))
        assert (digit, conf) == (4, 1.0)

    def test_eight_with_middle_flipped_is_zero(self):
        code = list(TEMPLATES[8])
        code[6] = 0  # drop segment G
        digit, conf = classify_digit(SegmentSignature(tuple(code)))
        assert digit == 0
        assert conf == 1.0  # exactly the 0 template

    def test_all_off_rejected(self):
        with pytest.raises(Unrecognized):
            classify_digit(SegmentSignature((0,) * 7))

    def test_exhaustive_code_space_matches_oracle(self):
        # brute-force every 7-bit code against the template table
        for bits in itertools.product((0, 1), repeat=7):
            dists = {d: sum(a != b for a, b in zip(bits, t)) for d, t in TEMPLATES.items()}
            best = min(dists.values())
            winners = [d for d, v in dists.items() if v == best]
            if best >= 2 or len(winners) != 1:
                with pytest.raises(Unrecognized):
                    classify_digit(SegmentSignature(bits))
            else:
                digit, conf = classify_digit(SegmentSignature(bits))
                assert digit == winners[0]
                assert conf == pytest.approx(1.0 - best / 7.0)


class TestRecognizeSetpoint:
    def test_round_trip_full_range_and_strokes(self):
        for value in range(16, 31):
            for stroke in (2, 3, 4):
                img = render_digits(str(value), stroke=stroke)
                res = recognize_setpoint(img)
                assert res.setpoint == value
                assert res.text == str(value)
                assert all(c == 1.0 for c in res.per_digit_confidence)

    def test_blank_image_no_digits(self):
        with pytest.raises(NoDigits):
            recognize_setpoint(gray(np.full((20, 40), 200)))

    def test_out_of_range_value_reported(self):
        with pytest.raises(OutOfRange) as exc:
            recognize_setpoint(render_digits("42"))
        assert exc.value.value == 42

    def test_noise_robustness_seeded(self):
        correct = 0
        for value in range(16, 31):
            img = add_salt_pepper(render_digits(str(value)), p=0.02, seed=1000 + value)
            try:
                if recognize_setpoint(img).setpoint == value:
                    correct += 1
            except Exception:
                pass
        assert correct / 15 >= 0.95

    def test_larger_style_with_erosion_kept(self):
        # thick strokes survive the erosion stage un-guarded
        img = render_digits("25", stroke=7, height=48, margin=10, spacing=10)
        res = recognize_setpoint(img)
        assert res.setpoint == 25


class TestRenderDigits:
    def test_deterministic(self):
        a = render_digits("19", stroke=3)
        b = render_digits("19", stroke=3)
        assert np.array_equal(a.pixels, b.pixels)

    def test_eight_is_all_on(self):
        img = render_digits("8")
        mask, _ = binarize(img)
        sig = digit_signature(mask, extract_regions(mask)[0])
        assert sig.segments == (True,) * 7

    def test_invalid_text(self):
        with pytest.raises(InvalidText):
            render_digits("2a")
        with pytest.raises(InvalidText):
            render_digits("")


class TestPgmIO:
    def test_round_trip_bit_exact(self, tmp_path):
        img = render_digits("27")
        path = tmp_path / "panel.pgm"
        write_pgm(img, path)
        back = read_pgm(path)
        assert np.array_equal(back.pixels, img.pixels)

    def test_comment_header_tolerated(self, tmp_path):
        path = tmp_path / "c.pgm"
        raster = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n255\n" + raster)
        img = read_pgm(path)
        assert img.width == 3 and img.height == 2
        assert img.pixels.tobytes() == raster
