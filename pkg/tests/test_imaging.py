import numpy as np
import pytest
from PIL import Image

from lrlab.imaging import (ImageFormatError, ImageStack, UnsupportedImageError,
                           load_image, quantize, resize_bilinear, save_image,
                           stack, unstack)


class TestLoad:
    def test_hand_written_p2(self, tmp_path):
        f = tmp_path / "t.pgm"
        f.write_text("P2\n2 2\n255\n0 255 128 64")
        img = load_image(f)
        assert img.shape == (2, 2)
        assert np.allclose(img.ravel(), [0.0, 1.0, 128 / 255, 64 / 255])

    def test_p2_with_comment(self, tmp_path):
        f = tmp_path / "t.pgm"
        f.write_text("P2\n# a comment\n2 1\n255\n10 20")
        assert np.allclose(load_image(f).ravel(), [10 / 255, 20 / 255])

    def test_black_png(self, tmp_path):
        f = tmp_path / "black.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(f)
        img = load_image(f)
        assert img.shape == (4, 4) and not img.any()

    def test_rgb_png_luma(self, tmp_path):
        f = tmp_path / "rgb.png"
        rgb = np.zeros((3, 3, 3), dtype=np.uint8)
        rgb[..., 0] = 255  # pure red
        Image.fromarray(rgb, mode="RGB").save(f)
        img = load_image(f)
        assert np.allclose(img, 0.299, atol=1e-6)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")

    def test_malformed_header(self, tmp_path):
        f = tmp_path / "bad.pgm"
        f.write_bytes(b"P5\n4 nonsense\n255\n")
        with pytest.raises(ImageFormatError):
            load_image(f)

    def test_truncated_payload(self, tmp_path):
        f = tmp_path / "short.pgm"
        f.write_bytes(b"P5\n4 4\n255\n\x00\x00")
        with pytest.raises(ImageFormatError):
            load_image(f)

    def test_unsupported_bit_depth(self, tmp_path):
        f = tmp_path / "deep.pgm"
        f.write_text("P2\n1 1\n65535\n1000")
        with pytest.raises(UnsupportedImageError):
            load_image(f)

    def test_unsupported_png_mode(self, tmp_path):
        f = tmp_path / "rgba.png"
        Image.fromarray(np.zeros((4, 4, 4), dtype=np.uint8), mode="RGBA").save(f)
        with pytest.raises(UnsupportedImageError):
            load_image(f)


class TestSave:
    def test_zero_image_pgm_payload(self, tmp_path):
        f = tmp_path / "z.pgm"
        save_image(np.zeros((3, 2)), f)
        raw = f.read_bytes()
        assert raw.startswith(b"P5\n2 3\n255\n")
        assert raw[len(b"P5\n2 3\n255\n"):] == b"\x00" * 6

    def test_ones_image_payload(self, tmp_path):
        f = tmp_path / "w.pgm"
        save_image(np.ones((2, 2)), f)
        assert f.read_bytes().endswith(b"\xff" * 4)

    @pytest.mark.parametrize("ext", [".pgm", ".png"])
    def test_round_trip_quantization_bound(self, tmp_path, ext):
        rng = np.random.default_rng(61)
        img = rng.uniform(0, 1, size=(9, 13))
        f = tmp_path / f"r{ext}"
        save_image(img, f)
        back = load_image(f)
        assert back.shape == img.shape
        assert np.max(np.abs(back - img)) <= 1 / 255

    def test_round_half_away_from_zero(self):
        # 0.5/255 rounds up to 1, not to even 0
        q = quantize(np.array([[0.5 / 255, 1.5 / 255]]))
        assert q.tolist() == [[1, 2]]

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(ValueError):
            save_image(np.zeros((2, 2)), tmp_path / "x.bmp")


class TestResize:
    def test_identity(self):
        rng = np.random.default_rng(62)
        img = rng.uniform(0, 1, (5, 7))
        assert np.array_equal(resize_bilinear(img, 7, 5), img)

    def test_constant_stays_constant(self):
        img = np.full((4, 6), 0.37)
        out = resize_bilinear(img, 11, 3)
        assert out.shape == (3, 11)
        assert np.allclose(out, 0.37)

    def test_hand_evaluated_upscale(self):
        # centers at (i+0.5)/n: 2x1 [0, 1] -> 3x1 [0, 0.5, 1]
        img = np.array([[0.0, 1.0]])
        out = resize_bilinear(img, 3, 1)
        assert np.allclose(out, [[0.0, 0.5, 1.0]], atol=1e-12)

    def test_output_within_input_range(self):
        rng = np.random.default_rng(63)
        img = rng.uniform(0.2, 0.8, (10, 10))
        out = resize_bilinear(img, 23, 17)
        assert out.min() >= img.min() - 1e-12
        assert out.max() <= img.max() + 1e-12

    def test_zero_target_rejected(self):
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros((3, 3)), 0, 3)


class TestStack:
    def test_two_images_columns(self):
        a = np.array([[0.1, 0.2], [0.3, 0.4]])
        b = np.array([[0.5, 0.6], [0.7, 0.8]])
        s = stack([a, b])
        assert s.matrix.shape == (4, 2)
        assert np.array_equal(s.matrix[:, 0], [0.1, 0.2, 0.3, 0.4])
        assert np.array_equal(s.matrix[:, 1], [0.5, 0.6, 0.7, 0.8])

    def test_single_image_round_trip(self):
        a = np.array([[0.1, 0.9]])
        s = stack([a])
        assert s.count == 1
        (back,) = unstack(s)
        assert np.array_equal(back, a)

    def test_seeded_round_trip(self):
        rng = np.random.default_rng(64)
        images = [rng.uniform(0, 1, (6, 5)) for _ in range(12)]
        back = unstack(stack(images))
        for a, b in zip(images, back):
            assert np.array_equal(a, b)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            stack([])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            stack([np.zeros((2, 2)), np.zeros((3, 2))])

    def test_unstack_clamps(self):
        s = ImageStack(width=1, height=2, count=1,
                       matrix=np.array([[-0.5], [1.5]]))
        (img,) = unstack(s)
        assert img.tolist() == [[0.0], [1.0]]

    def test_unstack_validates_shape(self):
        bad = ImageStack(width=2, height=2, count=2, matrix=np.zeros((3, 2)))
        with pytest.raises(ValueError):
            unstack(bad)
