import numpy as np
import pytest

from aura.core import HoleMask, Image, KeepMask
from aura.imageio import (
    load_hole_mask,
    load_image,
    load_keep_mask,
    save_image,
    save_mask,
)


def quantized(img: Image) -> np.ndarray:
    return np.rint(img.data * 255.0) / 255.0


class TestPng:
    def test_gray_round_trip(self, gray_image, tmp_path):
        path = tmp_path / "img.png"
        save_image(gray_image, path)
        back = load_image(path)
        assert back.channels == 1
        assert np.array_equal(back.data, quantized(gray_image))

    def test_rgb_round_trip(self, rgb_image, tmp_path):
        path = tmp_path / "img.png"
        save_image(rgb_image, path)
        back = load_image(path)
        assert back.channels == 3
        assert np.array_equal(back.data, quantized(rgb_image))


class TestPnm:
    def test_ascii_pgm_round_trip(self, gray_image, tmp_path):
        path = tmp_path / "img.pgm"
        save_image(gray_image, path)
        assert path.read_text().startswith("P2")
        back = load_image(path)
        assert np.array_equal(back.data, quantized(gray_image))

    def test_ascii_ppm_round_trip(self, rgb_image, tmp_path):
        path = tmp_path / "img.ppm"
        save_image(rgb_image, path)
        assert path.read_text().startswith("P3")
        back = load_image(path)
        assert np.array_equal(back.data, quantized(rgb_image))

    def test_binary_pgm_read(self, tmp_path):
        values = np.arange(6, dtype=np.uint8).reshape(2, 3) * 40
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n3 2\n255\n" + values.tobytes())
        back = load_image(path)
        assert np.array_equal(back.data[:, :, 0], values / 255.0)

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_text("P2\n# a comment\n2 1\n# another\n255\n7 250\n")
        back = load_image(path)
        assert np.array_equal(back.data[:, :, 0], [[7 / 255, 250 / 255]])

    def test_pgm_rejects_color(self, rgb_image, tmp_path):
        with pytest.raises(ValueError):
            save_image(rgb_image, tmp_path / "img.pgm")

    def test_ppm_rejects_gray(self, gray_image, tmp_path):
        with pytest.raises(ValueError):
            save_image(gray_image, tmp_path / "img.ppm")


class TestMasks:
    @pytest.mark.parametrize("suffix", [".pgm", ".png"])
    def test_round_trip(self, center_target, tmp_path, suffix):
        path = tmp_path / f"mask{suffix}"
        save_mask(center_target, path)
        back = load_hole_mask(path)
        assert np.array_equal(back.bits, center_target.bits)

    def test_threshold_at_127(self, tmp_path):
        path = tmp_path / "mask.pgm"
        path.write_text("P2\n4 1\n255\n0 127 128 255\n")
        assert np.array_equal(load_hole_mask(path).bits, [[False, False, True, True]])

    def test_polarity_types(self, center_target, tmp_path):
        path = tmp_path / "mask.pgm"
        save_mask(center_target, path)
        assert isinstance(load_hole_mask(path), HoleMask)
        assert isinstance(load_keep_mask(path), KeepMask)

    def test_rejects_color_mask(self, rgb_image, tmp_path):
        path = tmp_path / "mask.png"
        save_image(rgb_image, path)
        with pytest.raises(ValueError):
            load_hole_mask(path)


def test_unknown_format_rejected(gray_image, tmp_path):
    with pytest.raises(ValueError):
        save_image(gray_image, tmp_path / "img.tiff")
