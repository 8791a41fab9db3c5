import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipcap.errors import DepthTooLarge, ObstaclesOverlap, ShapeOutsideRoot
from lipcap.geom import (Annulus, Disc, DyadicShape, DyadicSquare, ParametricDomain, RasterSet,
                         Scene, Segment, annulus_clip, complement_in_ball, rasterize)

from conftest import UNIT, rasters


def test_square_geometry():
    s = DyadicSquare(3, 1, 2)
    assert s.side == 0.25
    assert s.bounds() == (0.75, 1.0, 0.25, 0.5)
    assert s.parent() == DyadicSquare(1, 0, 1)
    assert all(s.contains(c) for c in s.children())
    assert len(s.neighbors()) == 9 and s in s.neighbors()


def test_children_tile_parent():
    s = DyadicSquare(5, 2, 3)
    area = sum(c.side ** 2 for c in s.children())
    assert area == s.side ** 2
    xs = sorted({c.x0 for c in s.children()})
    assert xs == [s.x0, s.x0 + s.side / 2]


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        DyadicSquare(0, 0, -1)


def test_annulus_radii_and_shared_circle():
    a, b = Annulus(0j, 2), Annulus(0j, 3)
    assert a.inner == a.outer / 2
    assert b.outer == a.inner
    pt = np.array([a.inner + 0j])
    assert a.contains_points(pt)[0] and b.contains_points(pt)[0]


def test_empty_scene():
    assert len(rasterize(Scene(), 4)) == 0


def test_segment_bottom_row():
    r = rasterize(Scene(shapes=(Segment((0, 0), (1, 0)),)), 3)
    assert len(r) == 8
    assert set(r.cells[:, 1].tolist()) == {0}


def test_disc_touches_all_quadrants():
    r = rasterize(Scene(shapes=(Disc((0.5, 0.5), 0.5),)), 1)
    assert len(r) == 4


def test_depth_cap_and_outside_root():
    with pytest.raises(DepthTooLarge):
        rasterize(Scene(), 17)
    with pytest.raises(ShapeOutsideRoot):
        rasterize(Scene(shapes=(Segment((-0.5, 0.5), (0.5, 0.5)),)), 3)
    clipped = rasterize(Scene(shapes=(Segment((-0.5, 0.5), (0.5, 0.5)),)), 3, clip=True)
    assert len(clipped) > 0


def _brute_segment_cells(p, q, depth):
    """Leaves met by a segment, by dense sampling plus closed-square slack."""
    size = 1 << depth
    t = np.linspace(0, 1, 20001)
    x = p[0] + t * (q[0] - p[0])
    y = p[1] + t * (q[1] - p[1])
    cells = set()
    for i, j in zip(np.floor(x * size).astype(int), np.floor(y * size).astype(int)):
        cells.add((min(i, size - 1), min(j, size - 1)))
    return cells


@given(st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)),
       st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)))
def test_segment_raster_contains_sampled_cells(p, q):
    r = rasterize(Scene(shapes=(Segment(p, q),)), 5)
    got = {tuple(c) for c in r.cells.tolist()}
    assert _brute_segment_cells(p, q, 5) <= got


def test_disc_raster_matches_distance_oracle():
    c, rad, depth = (0.41, 0.57), 0.23, 5
    r = rasterize(Scene(shapes=(Disc(c, rad),)), depth)
    h = 2.0 ** -depth
    want = set()
    for i in range(1 << depth):
        for j in range(1 << depth):
            dx = max(i * h - c[0], 0, c[0] - (i + 1) * h)
            dy = max(j * h - c[1], 0, c[1] - (j + 1) * h)
            if math.hypot(dx, dy) <= rad:
                want.add((i, j))
    assert {tuple(x) for x in r.cells.tolist()} == want


def test_inner_raster_inside_outer():
    scene = Scene(shapes=(Disc((0.5, 0.5), 0.3),))
    inner, outer = rasterize(scene, 5, inner=True), rasterize(scene, 5)
    assert inner.issubset(outer) and len(inner) < len(outer)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                min_size=1, max_size=4))
def test_rasterize_monotone(segs):
    shapes = [Segment((a, b), (c, d)) for a, b, c, d in segs]
    small = rasterize(Scene(shapes=tuple(shapes[:-1])), 4)
    big = rasterize(Scene(shapes=tuple(shapes)), 4)
    assert small.issubset(big)


@given(st.tuples(st.floats(0, 1), st.floats(0, 1)), st.tuples(st.floats(0, 1), st.floats(0, 1)),
       st.integers(1, 6))
def test_refinement_consistency(p, q, depth):
    scene = Scene(shapes=(Segment(p, q), Disc((0.5, 0.3), 0.1)))
    fine = rasterize(scene, depth + 1)
    assert fine.coarsen(depth) == rasterize(scene, depth)


def test_dyadic_shape_maps_to_block():
    r = rasterize(Scene(shapes=(DyadicShape(1, 2, 2),)), 4)
    assert len(r) == 16
    assert r.maximal_blocks() == [DyadicSquare(1, 2, 2)]


def test_annulus_clip_full_root_oracle():
    full = RasterSet.full(UNIT, 5)
    clip = annulus_clip(full, Annulus(0j, 1))
    h = 2.0 ** -5
    want = set()
    for i in range(32):
        for j in range(32):
            dmin = math.hypot(i * h, j * h)
            dmax = math.hypot((i + 1) * h, (j + 1) * h)
            if dmin <= 0.5 and dmax >= 0.25:
                want.add((i, j))
    assert {tuple(c) for c in clip.cells.tolist()} == want


@given(rasters(), st.integers(0, 4), st.floats(0, 1), st.floats(0, 1))
def test_annulus_clip_subset(r, n, x, y):
    clip = annulus_clip(r, Annulus(complex(x, y), n))
    assert clip.issubset(r)


def test_annulus_clip_trivial_cases():
    empty = RasterSet.empty(UNIT, 4)
    assert annulus_clip(empty, Annulus(0j, 1)).is_empty
    far = rasterize(Scene(shapes=(DyadicShape(3, 3, 2),)), 4)
    assert annulus_clip(far, Annulus(0j, 3)).is_empty


def test_parametric_disjointness():
    ParametricDomain("slit", 0.5, 0.5, 0.25, 0.25)
    with pytest.raises(ObstaclesOverlap):
        ParametricDomain("slit", 1.0, 0.5, 1.0, 0.25)   # a_1 - r_1 = 0.25 = a_2 + r_2
    with pytest.raises(ObstaclesOverlap):
        ParametricDomain("slit", 0.5, 0.3, 0.01, 0.6)
    d = ParametricDomain("roadrunner", 0.5, 0.5, 0.25, 0.25)
    n = np.arange(1, 40)
    a, r = d.centers(n), d.radii(n)
    assert np.all(a[1:] + r[1:] < a[:-1] - r[:-1])


def test_complement_slit_segments():
    d = ParametricDomain("slit", 0.5, 0.5, 0.25, 0.25)
    raster, trunc = complement_in_ball(d, depth=8)
    leaf = 2.0 ** -8
    assert trunc == d.last_resolved(leaf) + 1
    want = rasterize(Scene(shapes=tuple(d.obstacle(n) for n in range(1, trunc))), 8, clip=True)
    assert raster == want
    assert set(raster.cells[:, 1].tolist()) == {0}


def test_complement_roadrunner_discs():
    d = ParametricDomain("roadrunner", 0.5, 0.5, 0.25, 0.25)
    raster, trunc = complement_in_ball(d, depth=8)
    assert len(raster) > len(complement_in_ball(ParametricDomain("slit", 0.5, 0.5, 0.25, 0.25), depth=8)[0])
    assert raster.cells[:, 1].max() > 0


def test_complement_empty_scene():
    raster, trunc = complement_in_ball(Scene(), radius=1.0, depth=6)
    assert raster.is_empty and trunc is None


@given(rasters())
def test_half_scale_stays_in_quadrant(r):
    h = r.half_scale()
    assert h.depth == r.depth + 1
    assert np.all(h.cells < (1 << r.depth))


@given(rasters(nonempty=True))
def test_maximal_blocks_tile_raster(r):
    blocks = r.maximal_blocks()
    area = sum(b.side ** 2 for b in blocks)
    assert area == pytest.approx(len(r) * r.leaf_side ** 2)
    leaves = r.leaf_squares()
    assert all(any(b.contains(l) for b in blocks) for l in leaves)
