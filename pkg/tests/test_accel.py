"""The numba-compiled and pure-numpy kernel variants must be interchangeable."""

import os
import subprocess
import sys

import numpy as np
import pytest

from fracvisco._accel import USE_NUMBA
from fracvisco._kernels import eval_ml_neg

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba inactive")


@needs_numba
@pytest.mark.parametrize("alpha,b", [(0.4, 1.0), (2.0 / 3.0, 2.0),
                                     (2.0 / 3.0, 2.0 / 3.0), (0.9, 1.0)])
def test_ml_variants_agree(alpha, b):
    xs = np.concatenate([[0.0], np.geomspace(1e-5, 60.0, 400)])
    a = eval_ml_neg(alpha, b, xs, impl="numba")
    c = eval_ml_neg(alpha, b, xs, impl="numpy")
    assert np.max(np.abs(a - c) / np.maximum(np.abs(c), 1e-30)) <= 1e-11


@needs_numba
def test_weight_tables_identical_across_variants(kernel_sec6, monkeypatch):
    # build_weights consumes ml values; the two variants must give tables
    # that agree to rounding
    from fracvisco import _kernels
    from fracvisco.weights import TimeGrid, build_weights

    grid = TimeGrid(np.array([0.0, 0.1, 0.35, 0.5, 1.0, 1.2]))
    tables = {}
    for impl in ("numba", "numpy"):
        monkeypatch.setattr(_kernels, "USE_NUMBA", impl == "numba")
        tables[impl] = build_weights(grid, kernel_sec6)
    diff = np.abs(tables["numba"].omega - tables["numpy"].omega)
    assert diff.max() <= 1e-14


def test_env_flag_disables_numba():
    env = dict(os.environ, FRACVISCO_NO_NUMBA="1")
    code = ("import fracvisco._accel as a; "
            "assert not a.USE_NUMBA; "
            "import fracvisco._kernels as k; "
            "assert k._eval_ml_numba is None; "
            "import numpy as np; "
            "v = k.eval_ml_neg(0.5, 1.0, np.array([2.0])); "
            "print(repr(float(v[0])))")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    import math

    from scipy.special import erfc

    assert float(out.stdout.strip()) == pytest.approx(
        math.exp(4.0) * erfc(2.0), rel=1e-10)


def test_benchmark_script_smoke():
    bench = os.path.join(os.path.dirname(__file__), "..", "benchmarks",
                         "bench_kernels.py")
    out = subprocess.run([sys.executable, bench, "--quick"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "ml_eval" in out.stdout
