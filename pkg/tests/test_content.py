import functools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipcap.content import (Ladder, PowerLaw, Tabulated, ball_bracket, dyadic_content, gauge_content,
                            ladder_schedule, lower_content_estimate, lower_content_raster,
                            optimal_cover, parse_gauge)
from lipcap.errors import BetaOutOfRange, GaugeInvalid
from lipcap.geom import DyadicSquare, RasterSet, Scene, Segment, rasterize

from conftest import UNIT, betas, rasters


def cover_oracle(raster, h):
    """Recursive min over covers, written against a set of leaf tuples."""
    occupied = {tuple(c) for c in raster.cells.tolist()}
    N = raster.depth

    @functools.lru_cache(maxsize=None)
    def best(level, i, j):
        span = 1 << (N - level)
        hit = any(i * span <= a < (i + 1) * span and j * span <= b < (j + 1) * span
                  for a, b in occupied)
        if not hit:
            return 0.0
        own = float(h(2.0 ** -level))
        if level == N:
            return own
        split = sum(best(level + 1, 2 * i + di, 2 * j + dj) for di in (0, 1) for dj in (0, 1))
        return min(own, split)

    return best(0, 0, 0)


UNIT_SEGMENT = Scene(shapes=(Segment((0, 0), (1, 0)),))


@pytest.mark.parametrize("depth", [2, 5, 8, 10])
def test_unit_segment_half_dimensional(depth):
    assert dyadic_content(rasterize(UNIT_SEGMENT, depth), 0.5).value == 1.0


@pytest.mark.parametrize("beta", [0.1, 0.5, 0.9])
def test_full_square_is_root(beta):
    assert dyadic_content(RasterSet.full(UNIT, 4), beta).value == 1.0


def test_single_leaf():
    r = RasterSet.from_cells(UNIT, 6, [(17, 40)])
    assert dyadic_content(r, 0.5).value == pytest.approx(2.0 ** -3)


def test_empty_is_zero():
    assert dyadic_content(RasterSet.empty(UNIT, 5), 0.3).value == 0.0


def test_beta_out_of_range():
    for b in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(BetaOutOfRange):
            dyadic_content(RasterSet.full(UNIT, 2), b)


# frozen values from the recursive oracle
@pytest.mark.parametrize("cells,depth,beta,expected", [
    ([(0, 0), (3, 3)], 2, 0.5, 1.0),
    ([(0, 0), (1, 0)], 3, 0.5, 0.5),
    ([(0, 0), (2, 0)], 3, 0.5, 2 * 2 ** -1.5),
    ([(0, 0), (1, 0), (0, 1), (1, 1)], 3, 0.5, 0.5),
    ([(0, 0), (7, 7)], 3, 0.3, 1.0),
    ([(0, 0), (7, 7)], 3, 0.7, 2 * 2 ** -2.1),
])
def test_small_examples(cells, depth, beta, expected):
    r = RasterSet.from_cells(UNIT, depth, cells)
    assert dyadic_content(r, beta).value == pytest.approx(expected, rel=1e-12)
    assert cover_oracle(r, PowerLaw(beta)) == pytest.approx(expected, rel=1e-12)


@given(rasters(max_depth=4), betas)
def test_dp_matches_oracle(r, beta):
    assert dyadic_content(r, beta).value == pytest.approx(cover_oracle(r, PowerLaw(beta)), rel=1e-12)


@given(rasters(max_depth=4), betas)
def test_optimal_cover_attains_value(r, beta):
    cover = optimal_cover(r, PowerLaw(beta))
    cost = sum(s.side ** beta for s in cover)
    assert cost == pytest.approx(dyadic_content(r, beta).value, rel=1e-12)
    for leaf in r.leaf_squares():
        assert any(s.contains(leaf) for s in cover)


@given(st.integers(1, 4).flatmap(lambda d: st.tuples(rasters(d, d), rasters(d, d))), betas)
def test_monotone_and_subadditive(pair, beta):
    a, b = pair
    ma, mb = dyadic_content(a, beta).value, dyadic_content(b, beta).value
    mu = dyadic_content(a.union(b), beta).value
    assert mu <= ma + mb + 1e-12
    assert max(ma, mb) <= mu + 1e-12


@given(rasters(nonempty=True), betas)
def test_half_scale_rule(r, beta):
    m = dyadic_content(r, beta).value
    assert dyadic_content(r.half_scale(), beta).value == pytest.approx(2.0 ** -beta * m, rel=1e-12)


@given(rasters(nonempty=True), st.floats(0.1, 0.5), st.floats(0.55, 0.9))
def test_gauge_monotone_in_beta(r, b1, b2):
    # r^b2 <= r^b1 on (0, 1]
    assert dyadic_content(r, b2).value <= dyadic_content(r, b1).value + 1e-12


@given(rasters(nonempty=True), betas, st.floats(0.1, 1.0), st.integers(0, 6))
def test_ladder_below_power(r, beta, eta, j):
    assert gauge_content(r, Ladder(beta, eta, j)).value <= dyadic_content(r, beta).value + 1e-12


def test_ladder_matches_power_above_crossover():
    g = Ladder(0.5, 0.5, 2)
    assert g.crossover == 2.0 ** -4
    r = np.array([0.5, 0.25, 2.0 ** -4])
    assert np.allclose(g(r), r ** 0.5)
    assert g(2.0 ** -6) < 2.0 ** -3


def test_ladder_sequence_for_a_point():
    point = Scene(shapes=(Segment((0.3, 0.3), (0.3, 0.3)),))
    res = lower_content_estimate(point, 0.5, 0.5, 4, depth_cap=16)
    assert ladder_schedule(0.5, 4) == [8, 16, 24, 32]
    assert res.ladder == [2.0 ** -7, 2.0 ** -14, 2.0 ** -13, 2.0 ** -12]
    assert res.truncated and res.value == 2.0 ** -7


def test_lower_content_of_segment_close_to_upper():
    r = rasterize(UNIT_SEGMENT, 10)
    lower = lower_content_raster(r, 0.5, eta=0.5, J=1).value
    assert 0 < lower <= dyadic_content(r, 0.5).value


def test_tabulated_gauge():
    g = Tabulated(((0.125, 0.1), (0.5, 0.4), (1.0, 1.0)))
    assert g(0.25) == pytest.approx(0.2)
    assert g(0.01) == 0.1
    with pytest.raises(GaugeInvalid):
        Tabulated(((0.5, 0.4), (0.25, 0.1)))
    with pytest.raises(GaugeInvalid):
        Tabulated(((0.25, 0.5), (0.5, 0.1)))


def test_gauge_content_with_power_matches_dyadic():
    r = rasterize(Scene(shapes=(Segment((0.1, 0.2), (0.8, 0.7)),)), 7)
    assert gauge_content(r, PowerLaw(0.4)).value == dyadic_content(r, 0.4).value


def test_parse_gauge():
    assert parse_gauge("power", 0.3) == PowerLaw(0.3)
    assert parse_gauge("ladder:eta=0.25,j=3", 0.3) == Ladder(0.3, 0.25, 3.0)
    with pytest.raises(GaugeInvalid):
        parse_gauge("cubic", 0.3)


def test_bracket_segment():
    res = ball_bracket(rasterize(UNIT_SEGMENT, 6), 0.5)
    assert res.value == 1.0
    assert res.lower == pytest.approx(2.0 ** -2.5)
    assert res.upper == pytest.approx(2.0 ** 0.25)


def test_bracket_empty():
    res = ball_bracket(RasterSet.empty(UNIT, 3), 0.5)
    assert res.lower == res.upper == 0.0


@given(rasters(nonempty=True), betas)
def test_bracket_contains_disc_lower_bound(r, beta):
    """One disc of radius sqrt(2)/2 * side covers each dyadic square in the optimal cover."""
    res = ball_bracket(r, beta)
    cover = optimal_cover(r, PowerLaw(beta))
    ball_cover = sum((s.side * math.sqrt(2) / 2 * 2) ** beta for s in cover)
    assert res.lower <= res.value <= res.upper
    assert ball_cover <= 2.0 ** (beta / 2) * res.value * (1 + 1e-12)
