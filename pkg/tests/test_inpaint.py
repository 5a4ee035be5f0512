import os
import stat
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aura.core import Image, KeepMask
from aura.errors import OracleProcessError
from aura.inpaint import InpainterSpec, complete

DIFFUSION = InpainterSpec(kind="diffusion-fill")
MEAN = InpainterSpec(kind="mean-fill")


def keep_with_hole(height, width, hole):
    bits = np.ones((height, width), bool)
    bits[hole] = False
    return KeepMask(bits)


class TestSpec:
    @pytest.mark.parametrize("kwargs", [
        dict(kind="nearest"),
        dict(tolerance=0.0),
        dict(max_iterations=0),
        dict(kind="external"),  # missing command
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            InpainterSpec(**kwargs)


class TestDiffusionFill:
    def test_constant_image_harmonic_extension(self):
        img = Image.constant(0.7, 8, 8)
        keep = keep_with_hole(8, 8, (slice(3, 6), slice(2, 7)))
        out = complete(img, keep, DIFFUSION)
        assert np.allclose(out.data, 0.7)

    def test_midpoint_interpolation(self):
        img = Image(np.array([[0.0, 0.25, 1.0]]))
        keep = KeepMask(np.array([[True, False, True]]))
        out = complete(img, keep, DIFFUSION)
        assert out.data[0, 1, 0] == pytest.approx(0.5, abs=DIFFUSION.tolerance)

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_maximum_principle(self, seed):
        rng = np.random.default_rng(seed)
        img = Image(rng.random((16, 16, 3)))
        bits = rng.random((16, 16)) > 0.45
        if not bits.any():
            bits[0, 0] = True
        keep = KeepMask(bits)
        out = complete(img, keep, DIFFUSION)
        holes = ~bits
        if holes.any():
            lo = img.data[bits].min(axis=0)
            hi = img.data[bits].max(axis=0)
            assert (out.data[holes] >= lo - 1e-12).all()
            assert (out.data[holes] <= hi + 1e-12).all()

    def test_deterministic(self, rgb_image, rng):
        bits = rng.random((rgb_image.height, rgb_image.width)) > 0.5
        bits[0, 0] = True
        keep = KeepMask(bits)
        a = complete(rgb_image, keep, DIFFUSION)
        b = complete(rgb_image, keep, DIFFUSION)
        assert np.array_equal(a.data, b.data)

    def test_border_holes_are_fine(self):
        img = Image(np.linspace(0, 1, 36).reshape(6, 6))
        keep = keep_with_hole(6, 6, (slice(0, 3), slice(0, 6)))  # top half holed
        out = complete(img, keep, DIFFUSION)
        assert np.isfinite(out.data).all()


class TestMeanFill:
    def test_hole_gets_context_mean(self):
        rng = np.random.default_rng(0)
        img = Image(rng.random((4, 4, 1)))
        keep = keep_with_hole(4, 4, (slice(1, 3), slice(1, 3)))
        out = complete(img, keep, MEAN)
        context_mean = img.data[keep.bits].mean()  # 12 context pixels
        assert np.allclose(out.data[~keep.bits], context_mean)

    def test_equals_diffusion_on_constant_boundary(self):
        img = Image.constant(0.42, 6, 6)
        keep = keep_with_hole(6, 6, (slice(2, 4), slice(2, 5)))
        a = complete(img, keep, MEAN)
        b = complete(img, keep, DIFFUSION)
        assert np.array_equal(a.data, b.data)


class TestCompositing:
    @pytest.mark.parametrize("spec", [MEAN, DIFFUSION])
    def test_keep_pixels_pass_through_bit_exact(self, spec, rgb_image, rng):
        bits = rng.random((rgb_image.height, rgb_image.width)) > 0.4
        bits[2, 2] = True
        keep = KeepMask(bits)
        out = complete(rgb_image, keep, spec)
        assert np.array_equal(out.data[bits], rgb_image.data[bits])

    def test_all_visible_returns_input(self, gray_image):
        keep = KeepMask.ones(gray_image.height, gray_image.width)
        out = complete(gray_image, keep, DIFFUSION)
        assert np.array_equal(out.data, gray_image.data)

    def test_all_holes_rejected(self, gray_image):
        keep = KeepMask(np.zeros((gray_image.height, gray_image.width), bool))
        with pytest.raises(ValueError):
            complete(gray_image, keep, DIFFUSION)


def write_script(path, body):
    path.write_text(textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return path


@pytest.fixture
def constant_inpainter(tmp_path):
    """External helper: fills the whole frame with a constant."""
    script = write_script(tmp_path / "fill.py", """\
        import sys
        from pathlib import Path
        from aura.imageio import load_image, save_image
        from aura.core import Image
        import numpy as np

        work = Path(sys.argv[1])
        img = load_image(work / "input.png")
        save_image(Image(np.full_like(img.data, 0.5)), work / "output.png")
    """)
    return InpainterSpec(kind="external", command=("python3", str(script)), timeout=60)


class TestExternalAdapter:
    def test_round_trip_and_compositing(self, gray_image, constant_inpainter):
        bits = np.ones((gray_image.height, gray_image.width), bool)
        bits[3:6, 4:9] = False
        keep = KeepMask(bits)
        out = complete(gray_image, keep, constant_inpainter)
        assert np.array_equal(out.data[bits], gray_image.data[bits])
        assert np.allclose(out.data[~bits], 128 / 255, atol=1e-9)

    def test_nonzero_exit_raises(self, gray_image, tmp_path):
        script = write_script(tmp_path / "bad.py", """\
            import sys
            print("synthetic failure", file=sys.stderr)
            sys.exit(3)
        """)
        spec = InpainterSpec(kind="external", command=("python3", str(script)))
        keep = keep_with_hole(gray_image.height, gray_image.width, (slice(0, 2), slice(0, 2)))
        with pytest.raises(OracleProcessError) as info:
            complete(gray_image, keep, spec)
        assert "synthetic failure" in (info.value.stderr or "")

    def test_missing_output_raises(self, gray_image, tmp_path):
        script = write_script(tmp_path / "noop.py", "import sys\n")
        spec = InpainterSpec(kind="external", command=("python3", str(script)))
        keep = keep_with_hole(gray_image.height, gray_image.width, (slice(0, 2), slice(0, 2)))
        with pytest.raises(OracleProcessError):
            complete(gray_image, keep, spec)

    def test_wrong_size_output_raises(self, gray_image, tmp_path):
        script = write_script(tmp_path / "shrink.py", """\
            import sys
            from pathlib import Path
            import numpy as np
            from aura.core import Image
            from aura.imageio import save_image

            work = Path(sys.argv[1])
            save_image(Image(np.zeros((2, 2, 1))), work / "output.png")
        """)
        spec = InpainterSpec(kind="external", command=("python3", str(script)))
        keep = keep_with_hole(gray_image.height, gray_image.width, (slice(0, 2), slice(0, 2)))
        with pytest.raises(OracleProcessError):
            complete(gray_image, keep, spec)

    def test_timeout_raises(self, gray_image, tmp_path):
        script = write_script(tmp_path / "slow.py", "import time\ntime.sleep(30)\n")
        spec = InpainterSpec(kind="external", command=("python3", str(script)), timeout=0.6)
        keep = keep_with_hole(gray_image.height, gray_image.width, (slice(0, 2), slice(0, 2)))
        with pytest.raises(OracleProcessError, match="timed out"):
            complete(gray_image, keep, spec)
