import math

import numpy as np
import pytest

from cpdiff import random_tiling as rt
from cpdiff.cps import TAU
from cpdiff.errors import ResourceCapError, ValidationError
from cpdiff.numerics import integrate_decaying


def test_single_forced_tile():
    s = rt.sample(1, p_u=1.0, seed=5)
    assert s.word() == "u"
    assert rt.internal_walk(s)[1] == 1.0


@pytest.mark.parametrize("tiles,expected", [
    ([True, False], [0.0, 1.0, 2 - TAU]),
    ([True] * 3, [0.0, 1.0, 2.0, 3.0]),
    ([False] * 2, [0.0, 1 - TAU, 2 - 2 * TAU]),
])
def test_internal_walk(tiles, expected):
    s = rt.TilingSample(np.array(tiles), 0.5, 0)
    assert np.allclose(rt.internal_walk(s), expected)


def test_vertex_coords_match_walk():
    s = rt.sample(200, seed=3)
    c = s.vertex_coords()
    assert np.allclose(c[:, 0] + c[:, 1] * (1 - TAU), rt.internal_walk(s))


def test_u_frequency():
    s = rt.sample(10**5, seed=42)
    p = 1 / TAU
    se = math.sqrt(p * (1 - p) / 10**5)
    assert abs(s.tiles.mean() - p) <= 3 * se


def test_seed_replay_and_independence():
    a, b = rt.sample(500, seed=9), rt.sample(500, seed=9)
    assert a.word() == b.word()
    assert rt.sample(500, seed=9, index=1).word() != a.word()


def test_fixed_composition():
    s = rt.sample(1000, p_u=1 / TAU, seed=1, composition="fixed")
    assert s.tiles.sum() == round(1000 / TAU)


def test_invalid_parameters():
    with pytest.raises(ValidationError):
        rt.sample(10, p_u=1.5)
    with pytest.raises(ValidationError):
        rt.sample(0)
    with pytest.raises(ValidationError):
        rt.sample(10, composition="markov")
    with pytest.raises(ResourceCapError):
        rt.averaged_histogram(10**6, 10**4)


def test_mean_step():
    assert rt.mean_step(1 / TAU) == pytest.approx(1 / TAU**2)
    assert rt.mean_step(1 / TAU**2) == pytest.approx(0.0, abs=1e-15)


def test_minimal_histogram_split():
    h = rt.averaged_histogram(1, 1, p_u=1.0, bins=4, seed=0, detrend=False, half_width=2.0)
    dens = h.density * h.bin_width
    assert dens.sum() == pytest.approx(1.0)
    assert dens[np.searchsorted(h.bin_edges, 0.0, side="right") - 1] == 0.5
    assert dens[np.searchsorted(h.bin_edges, 1.0, side="right") - 1] == 0.5


def test_histogram_normalised():
    h = rt.averaged_histogram(300, 400, seed=2)
    assert h.overflow == 0
    assert np.sum(h.density) * h.bin_width == pytest.approx(1.0, abs=1e-12)


def test_histogram_thread_independent():
    a = rt.averaged_histogram(600, 300, seed=7, threads=1)
    b = rt.averaged_histogram(600, 300, seed=7, threads=4)
    assert np.array_equal(a.counts, b.counts)
    assert a.vertex_std == b.vertex_std


def test_profile_values():
    assert rt.profile_shape(0.0) == pytest.approx(2 / math.sqrt(math.pi))
    closed = math.sqrt(TAU / 200) * 2 / math.sqrt(math.pi)
    assert closed == pytest.approx(0.101492484, abs=1e-9)
    assert rt.asymptotic_profile(0.0, 100) == pytest.approx(closed, rel=1e-14)


def test_profile_mass():
    # |f(z)| <= 2 / (1 + |z|)^2 holds since f <= 2/sqrt(pi) and f(z) ~ exp(-z^2)/(sqrt(pi) z^2)
    res = integrate_decaying(rt.profile_shape, 2.0, 1.0, tol=1e-10)
    assert abs(res.value - 1.0) <= 1e-8


def test_profile_positive_decreasing():
    z = np.linspace(0, 6, 2000)
    f = rt.profile_shape(z)
    assert np.all(f >= 0)
    assert np.all(np.diff(f) <= 0)
    assert np.allclose(rt.profile_shape(-z), f)


def test_profile_distance_zero_for_exact_profile():
    h = rt.averaged_histogram(10, 100, seed=0)
    exact = rt.asymptotic_profile(h.centers, 100)
    h.counts = exact * h.n_samples * (h.n_tiles + 1) * h.bin_width
    assert rt.profile_distance(h, 100) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValidationError):
        rt.profile_distance(h, 99)


def test_profile_distance_small():
    h = rt.averaged_histogram(2000, 1000, seed=11)
    assert rt.profile_distance(h, 1000) < 0.05


def test_distance_improves_with_n():
    d_small = rt.profile_distance(rt.averaged_histogram(2000, 100, seed=3), 100)
    d_large = rt.profile_distance(rt.averaged_histogram(2000, 10**4, seed=3), 10**4)
    assert d_large <= d_small


def test_both_tile_assignments_match_profile():
    for p in (1 / TAU, 1 / TAU**2):
        h = rt.averaged_histogram(2000, 1000, p_u=p, seed=4)
        assert rt.profile_distance(h, 1000) < 0.05


def test_drift_matches_prediction():
    h = rt.averaged_histogram(3000, 500, seed=8)
    assert abs(h.final_step_mean - rt.mean_step(1 / TAU)) <= 4 * h.final_step_se
