"""Compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from cpdiff import cps
from cpdiff._backend import BACKEND, kernels, pykernels

BACKENDS = [pykernels] + ([kernels] if kernels is not pykernels else [])


@pytest.fixture(params=BACKENDS, ids=lambda k: k.__name__.rsplit(".", 1)[-1])
def kern(request):
    return request.param


def test_compensated_sum(kern):
    v = np.array([1e16, 1.0, -1e16, 1.0])
    assert kern.compensated_sum(v) == 2.0


def test_phase_sum_against_direct(kern):
    rng = np.random.default_rng(1)
    x = rng.uniform(-1e4, 1e4, size=(5000, 1))
    w = rng.normal(size=5000) + 1j * rng.normal(size=5000)
    k = np.array([0.37])
    ref = np.sum(w * np.exp(-2j * np.pi * (x[:, 0] * k[0])))
    got = kern.phase_sum(np.ascontiguousarray(x), np.ascontiguousarray(w.real),
                         np.ascontiguousarray(w.imag), k)
    assert abs(got - ref) < 1e-8


def test_enumeration_parity():
    s = cps.fibonacci_scheme()
    args = (np.ascontiguousarray(s.basis), 1, np.array([3.0]), 50.0, np.array([0.2]), 4.0,
            np.array([-80, -60]), np.array([80, 60]), 10**6)
    a = cps.sort_coords(pykernels.enumerate_candidates(*args))
    b = cps.sort_coords(kernels.enumerate_candidates(*args))
    assert np.array_equal(a, b)


def test_walk_histogram_parity():
    rng = np.random.default_rng(2)
    tiles = (rng.random((50, 300)) < 0.6).astype(np.uint8)
    a = pykernels.walk_histogram(tiles, 1.0, -0.618, -40.0, 0.5, 160)
    b = kernels.walk_histogram(tiles, 1.0, -0.618, -40.0, 0.5, 160)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]
    assert a[2] == pytest.approx(b[2], rel=1e-12) and a[3] == pytest.approx(b[3], rel=1e-12)


def test_walk_histogram_overflow_counted(kern):
    tiles = np.ones((2, 10), dtype=np.uint8)
    counts, overflow, _, _ = kern.walk_histogram(tiles, 1.0, -0.618, 0.0, 1.0, 5)
    assert counts.sum() + overflow == 22
    assert overflow == 12


def test_enumeration_cap_raises(kern):
    s = cps.fibonacci_scheme()
    with pytest.raises(OverflowError):
        kern.enumerate_candidates(np.ascontiguousarray(s.basis), 1, np.zeros(1), 1e4,
                                  np.zeros(1), 5.0, np.array([-10**4, -10**4]),
                                  np.array([10**4, 10**4]), 10)


def test_forced_fallback_backend():
    code = ("from cpdiff._backend import BACKEND; from cpdiff import cps, model_set as m;"
            "s = cps.fibonacci_scheme();"
            "print(BACKEND, round(m.density_empirical(s, m.fibonacci_window(), 2000.0), 4))")
    env = dict(os.environ, CPDIFF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out[0] == "python"
    assert abs(float(out[1]) - 0.7236) < 0.005


def test_backend_name():
    assert BACKEND in ("cython", "python")
