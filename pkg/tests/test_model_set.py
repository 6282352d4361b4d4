import math

import mpmath
import numpy as np
import pytest

from cpdiff import cps, model_set as ms
from cpdiff.cps import TAU, GoldenInteger
from cpdiff.errors import ValidationError
from cpdiff.weights import WeightFunction, bump, gaussian, zero

from oracles import in_fibonacci_window

FIB = cps.fibonacci_scheme()
W = ms.fibonacci_window()


def test_small_model_set_matches_brute_force():
    pts = ms.model_set_points(FIB, W, 5.0)
    expected = sorted(
        (i, j) for i in range(-30, 31) for j in range(-30, 31)
        if abs(i + j * TAU) <= 5 and in_fibonacci_window(i, j)
    )
    assert [tuple(p) for p in pts] == expected


def test_gaps_are_one_or_tau():
    x = np.sort(FIB.direct(ms.model_set_points(FIB, W, 500.0))[:, 0])
    gaps = np.diff(x)
    assert np.all(np.isclose(gaps, 1.0) | np.isclose(gaps, TAU))
    assert np.isclose(gaps, 1.0).any() and np.isclose(gaps, TAU).any()


def test_half_open_window_boundary_exact():
    pts = {tuple(p) for p in ms.model_set_points(FIB, W, 20.0)}
    assert FIB.internal((0, -1))[0] == pytest.approx(TAU - 1)
    assert FIB.internal((-1, 0))[0] == -1.0
    assert (0, -1) in pts  # closed upper end
    assert (-1, 0) not in pts  # open lower end


def test_origin_in_model_set():
    assert (0, 0) in {tuple(p) for p in ms.model_set_points(FIB, W, 3.0)}


def test_zero_volume_window_rejected():
    with pytest.raises(ValidationError):
        ms.Interval(0.5, 0.5)
    with pytest.raises(ValidationError):
        ms.Ball((0.0,), 0.0)


def test_parse_window():
    w = ms.parse_window("interval:-1:0.618034:open-closed")
    assert w.volume == pytest.approx(1.618034)
    assert not w.intervals[0].lo_closed and w.intervals[0].hi_closed
    exact = ms.parse_window("interval:-1:tau-1:open-closed")
    assert exact.intervals[0].hi == GoldenInteger(-1, 1)
    assert ms.parse_window("ball:0:0.5").volume == 1.0
    for bad in ("interval:1", "box:0:1", "interval:0:1:half-open", "interval:a:b"):
        with pytest.raises(ValidationError):
            ms.parse_window(bad)


def test_density_exact_cases():
    assert ms.density_exact(FIB, W) == pytest.approx(TAU / math.sqrt(5))
    unit = ms.Box((ms.Interval(0.0, math.sqrt(5)),))
    assert ms.density_exact(FIB, unit) == pytest.approx(1.0)
    double = ms.Box((ms.Interval(0.0, 2 * TAU),))
    assert ms.density_exact(FIB, double) == pytest.approx(2 * ms.density_exact(FIB, W))


def test_density_only_origin():
    assert ms.density_empirical(FIB, W, 0.5) == pytest.approx(1 / 1.0)


@pytest.mark.parametrize("a", [0.0, 41.2])
@pytest.mark.parametrize("u", [0.0, 0.1, 0.37])
def test_density_converges(a, u):
    val = ms.density_empirical(FIB, W.shifted(u), 5000.0, a)
    assert val == pytest.approx(TAU / math.sqrt(5), rel=0.01)


def test_ball_window_density():
    w = ms.Ball((0.2,), 0.7)
    assert ms.density_empirical(FIB, w, 5000.0) == pytest.approx(1.4 / math.sqrt(5), rel=0.01)


def test_golden_shift_stays_exact():
    w = W.shifted(GoldenInteger(1, 0))
    assert w.intervals[0].lo == GoldenInteger(0, 0)


def _bump_in_window():
    lo, hi = -1.0, TAU - 1
    return bump(center=0.5 * (lo + hi), halfwidth=0.49 * (hi - lo))


def test_weyl_average_bump():
    f = _bump_in_window()
    c, h = f.support
    with mpmath.workdps(30):
        integral = float(mpmath.quad(lambda y: complex(f(np.array([float(y)]))[0]).real,
                                     [c - h, c, c + h]))
    val = ms.weyl_average(FIB, W, f, 1e4)
    assert val.real == pytest.approx(integral / math.sqrt(5), rel=0.01)


def test_weyl_average_zero():
    assert ms.weyl_average(FIB, W, zero(), 100.0) == 0


def test_weight_outside_window_rejected():
    with pytest.raises(ValidationError):
        ms.weyl_average(FIB, W, gaussian(), 100.0)


def _plateau(delta):
    lo, hi = -1.0, TAU - 1

    def step(t):
        t = np.clip(t, 0.0, 1.0)
        return t * t * (3 - 2 * t)

    def func(y):
        return step((y - lo) / delta) * step((hi - y) / delta)

    return WeightFunction(f"plateau{delta}", func, 1.0, 1.0, support=(0.5 * (lo + hi), 0.5 * TAU))


def test_smoothed_indicator_approaches_density():
    # each smoothstep ramp loses delta/2 of mass, so the limit is (tau - delta)/sqrt5
    exact = ms.density_exact(FIB, W)
    errs = []
    for dl in (0.3, 0.1, 0.02):
        val = ms.weyl_average(FIB, W, _plateau(dl), 1e4).real
        assert val == pytest.approx((TAU - dl) / math.sqrt(5), rel=0.01)
        errs.append(abs(val - exact))
    assert errs[0] > errs[1] > errs[2]


def test_windowed_transform_at_zero_is_integral():
    f = _bump_in_window()
    c, h = f.support
    full = ms.windowed_transform(W, f, [0.0])[0]
    with mpmath.workdps(30):
        integral = float(mpmath.quad(lambda y: complex(f(np.array([float(y)]))[0]).real,
                                     [c - h, c, c + h]))
    assert full.real == pytest.approx(integral, rel=1e-10)
