import subprocess
import sys

import numpy as np
import pytest

from pavetex import _kernels_py, backend
from pavetex.imaging import quantize


def seeded_map(seed, shape=(24, 20), levels=16):
    p = np.random.default_rng(seed).integers(0, 256, shape).astype(np.uint8)
    return quantize(p, levels)


class TestBackendParity:
    def test_compiled_backend_active(self):
        # the build ships the compiled kernel; the pure-python fallback is
        # only expected when the extension is unavailable or forced off
        assert backend.backend_name() in ("cython", "python")

    @pytest.mark.parametrize("window", [3, 5, 7, 11])
    def test_backends_agree(self, window):
        cython_kernels = pytest.importorskip("pavetex._kernels")
        for seed in range(3):
            q = seeded_map(seed)
            a = cython_kernels.haralick_window_maps(q, 16, window)
            b = _kernels_py.haralick_window_maps(q, 16, window)
            assert np.abs(a - b).max() < 1e-9

    def test_backends_agree_nonsquare_and_levels(self):
        cython_kernels = pytest.importorskip("pavetex._kernels")
        q = seeded_map(9, shape=(13, 31), levels=8)
        a = cython_kernels.haralick_window_maps(q, 8, 5)
        b = _kernels_py.haralick_window_maps(q, 8, 5)
        assert np.abs(a - b).max() < 1e-9

    def test_force_python_env_var(self):
        code = (
            "import os; os.environ['PAVETEX_FORCE_PYTHON_KERNELS'] = '1'; "
            "import pavetex; print(pavetex.backend_name())"
        )
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == "python"

    def test_python_backend_full_pipeline(self, monkeypatch):
        from pavetex import texture

        p = np.random.default_rng(3).integers(0, 256, (24, 24)).astype(np.uint8)
        want = texture.extract_fs(p).fs
        monkeypatch.setattr(
            backend, "haralick_window_maps", _kernels_py.haralick_window_maps
        )
        got = texture.extract_fs(p).fs
        assert np.abs(got - want).max() < 1e-9
