import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipcap.errors import DepthInsufficient, NotDivergent
from lipcap.geom import Disc, DyadicShape, ParametricDomain, Scene, Segment
from lipcap.wiener import (CONVERGES, DIVERGES, SeriesSpec, annular_test_functions, annular_weight,
                           classify, classify_parametric, closed_form_terms, crosses_annulus,
                           divergence_witness, in_sector, log2_ratio, scene_obstacles, series_terms)
from lipcap.smoothfn import nk_seminorm

SLIT = ParametricDomain("slit", 0.5, 0.5, 0.25, 0.25)
SLIT_SIXTEENTH = ParametricDomain("slit", 0.5, 0.5, 1 / 16, 0.25)
ROADRUNNER = ParametricDomain("roadrunner", 0.5, 0.5, 0.25, 0.25)


def verdict(domain, s, k=0):
    return classify(domain, SeriesSpec(s, k)).verdict


def test_spec_validation():
    for bad in (dict(s=0.0), dict(s=-1.0), dict(s=-0.5, k=-1), dict(s=-0.5, content="middle")):
        with pytest.raises(ValueError):
            SeriesSpec(**bad)
    assert SeriesSpec(-0.3).beta == pytest.approx(0.7)


@pytest.mark.parametrize("s,expected", [(-0.4, CONVERGES), (-0.5, DIVERGES), (-0.6, DIVERGES),
                                        (-0.1, CONVERGES)])
def test_slit_threshold(s, expected):
    assert verdict(SLIT_SIXTEENTH, s) == expected


def test_boundary_ratio_is_exactly_one():
    assert log2_ratio(0.25, 0.5, 0, -0.5) == Fraction(0)
    rep = classify_parametric(SLIT_SIXTEENTH, SeriesSpec(-0.5))
    assert rep.tail_model["ratio"] == 1.0 and rep.dual_norm_estimate == math.inf


@pytest.mark.parametrize("s,expected", [(-0.7, CONVERGES), (-0.75, DIVERGES), (-0.8, DIVERGES)])
def test_first_order_threshold(s, expected):
    # rho = 2^(1 - 4 beta) for k = 1
    assert verdict(SLIT_SIXTEENTH, s, k=1) == expected


def test_closed_form_sum():
    rep = classify_parametric(SLIT, SeriesSpec(-0.4), n_terms=400)
    assert rep.dual_norm_estimate == pytest.approx(sum(v for _, v in rep.terms), rel=1e-9)


@given(st.sampled_from([(0.25, 0.5), (0.125, 0.5), (0.1, 0.6), (0.2, 0.45)]),
       st.floats(-0.95, -0.05), st.floats(0.0, 0.9), st.integers(0, 3))
def test_verdict_monotone_in_s(pq, s0, ds, k):
    p, q = pq
    s1 = min(s0 + ds, -0.01)
    d = ParametricDomain("slit", 0.5, q, min(0.01, p / 8), p)
    if verdict(d, s0, k) == CONVERGES:
        assert verdict(d, s1, k) == CONVERGES


def test_slit_and_roadrunner_agree():
    for s in np.linspace(-0.95, -0.05, 19):
        assert verdict(SLIT, float(s)) == verdict(ROADRUNNER, float(s))
    assert verdict(ROADRUNNER, -0.4) == CONVERGES


def test_raster_terms_increase_with_k():
    a = series_terms(SLIT_SIXTEENTH, SeriesSpec(-0.4, 0), 6)
    b = series_terms(SLIT_SIXTEENTH, SeriesSpec(-0.4, 1), 6)
    assert all(tb >= ta for (_, ta), (_, tb) in zip(a.terms, b.terms))


def test_raster_terms_track_closed_form():
    spec = SeriesSpec(-0.4)
    rep = series_terms(SLIT_SIXTEENTH, spec, 10)
    exact = closed_form_terms(SLIT_SIXTEENTH, spec, 10)
    lo, hi = 2.0 ** (-spec.beta - 2), 2.0 ** (spec.beta + 2)
    for (n, raster), (_, closed) in zip(rep.terms, exact):
        assert lo <= raster / closed <= hi, n
    assert all(v >= 0 for _, v in rep.terms)
    assert np.all(np.diff(rep.partial_sums) >= 0)


def test_obstacle_free_scene_converges():
    rep = classify(Scene(b=(0.5, 0.5)), SeriesSpec(-0.4), n_max=6, depth=8)
    assert rep.verdict == CONVERGES
    assert rep.dual_norm_estimate == 0.0
    assert all(v == 0 for _, v in rep.terms)


def test_radial_segment_diverges():
    scene = Scene(shapes=(Segment((0, 0), (1, 0)),))
    rep = classify(scene, SeriesSpec(-0.4), n_max=8, depth=11)
    assert rep.verdict == DIVERGES
    beta = 0.6
    for n, v in rep.terms:
        assert v >= 2.0 ** n * 2.0 ** (-(n + 1) * beta) * 2.0 ** (-beta - 2)


@pytest.mark.parametrize("s", [-0.9, -0.5, -0.1])
def test_quadrant_diverges(s):
    scene = Scene(shapes=(DyadicShape(0, 0, 1),))
    assert classify(scene, SeriesSpec(s), n_max=6, depth=9).verdict == DIVERGES


def test_isolated_disc_is_undetermined():
    scene = Scene(shapes=(Disc((0.7, 0.7), 0.1),))
    rep = classify(scene, SeriesSpec(-0.4), n_max=6, depth=8)
    assert rep.verdict not in (CONVERGES, DIVERGES)


def test_crossing_detector():
    seg = scene_obstacles(Scene(shapes=(Segment((0, 0), (1, 0)),)), 8)
    assert all(crosses_annulus(seg, 0j, n) for n in range(1, 6))
    dot = scene_obstacles(Scene(shapes=(Disc((0.3, 0.0), 0.01),)), 8)
    assert not crosses_annulus(dot, 0j, 1)


def test_depth_insufficient():
    with pytest.raises(DepthInsufficient):
        series_terms(Scene(shapes=(Segment((0, 0), (1, 0)),)), SeriesSpec(-0.4), 8, depth=4)


def test_no_witness_for_convergent_series():
    with pytest.raises(NotDivergent):
        divergence_witness(SLIT, SeriesSpec(-0.4), 4)


def test_witness_soundness():
    spec = SeriesSpec(-0.5)
    w6, w12 = divergence_witness(SLIT, spec, 6), divergence_witness(SLIT, spec, 12)
    assert min(w12.soundness_slack()) >= 1.0
    for _, _, mu in w12.measures:
        assert np.all(in_sector(mu.points))
    increment = sum(lam * 2.0 ** n * mu.total for n, lam, mu in w12.measures if n > 6)
    gain = w12.value_at_zero.real - w6.value_at_zero.real
    assert gain >= 0.5 * increment / (math.sqrt(2) * math.pi) > 0
    assert w12.norm_bound_grid <= 1.2 * w6.norm_bound_grid


def test_annular_weights_sum_to_one():
    v = np.linspace(-3, 3, 601)
    total = sum(annular_weight(v - m) for m in range(-6, 7))
    assert np.allclose(total, 1.0, atol=1e-12)


def test_annular_partition_on_midradius():
    r = (2.0 ** -3 + 2.0 ** -4) / 2
    total = sum(annular_weight(-np.log2(r) - n) for n in range(0, 9))
    assert abs(total - 1) <= 1e-9


def test_sampled_annular_functions_sum_on_shared_nodes():
    """(+-3/32, 0) and (0, +-3/32) are lattice nodes of every grid, so no interpolation enters."""
    fns = annular_test_functions(n_max=8, cells=128)
    r = 3 / 32
    pts = np.array([r, -r, 1j * r, -1j * r])
    total = sum(f.phi.at(pts) for f in fns if f.phi.xs[0] <= -r and f.phi.xs[-1] >= r)
    assert np.abs(total - 1).max() <= 1e-9


def test_annular_support():
    f = annular_test_functions(n_min=5, n_max=5, cells=256)[0]
    X, Y = f.phi.nodes()
    r = np.hypot(X, Y)
    live = f.phi.values > 0
    assert r[live].min() >= 2.0 ** -7 and r[live].max() <= 2.0 ** -4


def test_annular_seminorms_scale():
    fns = annular_test_functions(n_min=2, n_max=6, cells=512)
    n3 = [nk_seminorm(f.phi, 3).value for f in fns]
    n3q = [nk_seminorm(f.phi_over_z, 3).value * 2.0 ** -f.n for f in fns]
    assert max(n3) <= 2 * min(n3)
    assert max(n3q) <= 2 * min(n3q)
