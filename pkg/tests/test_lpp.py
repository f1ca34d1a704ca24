import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from competition_lab import _pykernels, lpp, rng
from competition_lab._backend import kernels
from competition_lab.errors import HorizonError, PathExitsBox, UncoveredSite
from competition_lab.model import (
    InterfaceProfile,
    Params,
    WeightField,
    hashed_weights,
    sample_initial_interface,
)

from conftest import PARAM_GRID


def quadrant_profile(n):
    """Axes staircase: up the y-axis to (0, n), across to (n, 0)."""
    pts = [(0, y) for y in range(n, 0, -1)] + [(1, 1)] + [(x, 0) for x in range(1, n + 1)]
    # (0,1) -> (1,1) -> (1,0)
    return InterfaceProfile.from_points(pts)


def field_for(params, seed, side, store="full"):
    s = rng.RngStream(seed)
    prof = sample_initial_interface(params, side, s)
    return lpp.compute_passage_times(prof, hashed_weights(s), top=side, store=store)


def test_constant_weights_on_quadrant():
    prof = quadrant_profile(12)
    w = WeightField.constant((0, 12, 0, 12), 1.0)
    f = lpp.compute_passage_times(prof, w)
    for x in range(1, 13):
        for y in range(1, 13):
            # (1, 1) sits on the staircase
            assert f.value(x, y) == max(x + y - 2, 0)
    assert f.value(0, 5) == 0.0 and f.value(5, 0) == 0.0


def test_hand_computed_small_box():
    prof = quadrant_profile(3)
    vals = np.array([[9, 9, 9, 9], [9, 1, 2, 3], [9, 4, 5, 6], [9, 7, 8, 9]], dtype=float)
    f = lpp.compute_passage_times(prof, WeightField.from_array(vals, 0, 0))
    expected = {(1, 1): 0, (2, 1): 2, (3, 1): 5, (1, 2): 4, (2, 2): 9, (3, 2): 15,
                (1, 3): 11, (2, 3): 19, (3, 3): 28}
    for (x, y), g in expected.items():
        assert f.value(x, y) == g


def test_frozen_passage_value(stream):
    prof = sample_initial_interface(Params(0.5, 0.5), 20, stream)
    f = lpp.compute_passage_times(prof, hashed_weights(stream))
    assert f.top == 21
    assert f.value(21, 21) == 93.44471294366302
    path = lpp.trace_competition_interface(f)
    assert path.n_steps == 22 and path.steps[-1].tolist() == [21, 3]


def test_box_larger_than_profile_rejected(stream):
    prof = sample_initial_interface(Params(0.5, 0.5), 20, stream)
    with pytest.raises(UncoveredSite):
        lpp.compute_passage_times(prof, hashed_weights(stream), top=40)


def test_store_modes_agree():
    full = field_for(Params(0.4, 0.6), 8, 60)
    quad = field_for(Params(0.4, 0.6), 8, 60, store="quadrant")
    part = field_for(Params(0.4, 0.6), 8, 60, store=(30, 45))
    assert full.interior_count == quad.interior_count
    for x, y in [(1, 1), (60, 60), (30, 45), (45, 50), (7, 59)]:
        assert quad.value(x, y) == full.value(x, y)
        if x >= 30 and y >= 45:
            assert part.value(x, y) == full.value(x, y)
    with pytest.raises(UncoveredSite):
        part.value(10, 10)


def test_box_growth_keeps_values():
    small = field_for(Params(0.3, 0.7), 21, 40)
    big = field_for(Params(0.3, 0.7), 21, 70)
    for x in range(1, 41, 3):
        for y in range(1, 41, 3):
            assert small.value(x, y) == big.value(x, y)


def test_materialised_and_hashed_weights_agree(stream):
    from competition_lab.model import sample_weights

    prof = sample_initial_interface(Params(0.6, 0.4), 30, stream)
    a = lpp.compute_passage_times(prof, hashed_weights(stream))
    b = lpp.compute_passage_times(prof, sample_weights((a.x_lo, a.top, a.y_lo, a.top), stream))
    assert np.array_equal(a.G, b.G)


def test_monotone_in_both_directions():
    f = field_for(Params(0.5, 0.5), 4, 50)
    inside = f.interior_mask()
    G = f.G
    right = inside[:, 1:] & inside[:, :-1]
    up = inside[1:, :] & inside[:-1, :]
    assert np.all(G[:, 1:][right] > G[:, :-1][right])
    assert np.all(G[1:, :][up] > G[:-1, :][up])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(PARAM_GRID), st.integers(5, 25))
def test_event_driven_matches_sweep(seed, params, side):
    s = rng.RngStream(seed)
    prof = sample_initial_interface(params, side, s)
    w = hashed_weights(s)
    a = lpp.compute_passage_times(prof, w, top=side)
    b, events = lpp.event_driven_growth(prof, w, top=side)
    assert events == a.interior_count
    assert np.array_equal(a.G, b.G)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(PARAM_GRID), st.integers(5, 40))
def test_labels_match_geodesic_origins(seed, params, side):
    f = field_for(params, seed, side)
    labels = lpp.label_clusters(f)
    origins = lpp.origin_sides(f)
    inside = f.interior_mask()
    assert np.array_equal(labels.sigma[inside], origins[inside])
    assert labels(1, 2) == 1 and labels(2, 1) == 2


def test_geodesic_energy_equals_passage_time():
    f = field_for(Params(0.7, 0.4), 13, 40)
    labels = lpp.label_clusters(f)
    for z in [(40, 40), (2, 1), (17, 33), (35, 2), (1, 40)]:
        geo = lpp.backtrack_geodesic(f, z)
        assert geo.energy == f.value(*z)
        assert geo.origin == labels(*z)
        d = np.diff(geo.path, axis=0)
        assert np.all((d == [-1, 0]).all(axis=1) | (d == [0, -1]).all(axis=1))
        assert not f.is_interior(*geo.path[-1])


def test_ties_on_constant_weights():
    # all ties: left predecessor wins except at (2, 1)
    prof = quadrant_profile(6)
    f = lpp.compute_passage_times(prof, WeightField.constant((0, 6, 0, 6)))
    lab = lpp.label_clusters(f)
    assert lab(2, 1) == 2 and lab(1, 2) == 1
    assert lab(3, 1) == 2 and lab(1, 6) == 1
    assert np.array_equal(lab.sigma[f.interior_mask()], lpp.origin_sides(f)[f.interior_mask()])


def test_competition_interface_rule():
    f = field_for(Params(0.8, 0.2), 3, 80, store="quadrant")
    path = lpp.trace_competition_interface(f, 60)
    assert path.steps[0].tolist() == [1, 1] and path.times[0] == 0.0
    for (x, y), (nx, ny) in zip(path.steps[:-1], path.steps[1:]):
        r, u = f.value(x + 1, y), f.value(x, y + 1)
        assert (nx, ny) == ((x + 1, y) if r < u else (x, y + 1))
    assert np.all(np.diff(path.times) > 0)


def test_competition_interface_separates_clusters():
    f = field_for(Params(0.6, 0.3), 17, 60)
    lab = lpp.label_clusters(f)
    path = lpp.trace_competition_interface(f)
    for x, y in path.steps[1:]:
        # sites just above-left belong to cluster 1, below-right to cluster 2
        if f.is_interior(x, y + 1):
            assert lab(x, y + 1) == 1
        if f.is_interior(x + 1, y):
            assert lab(x + 1, y) == 2


def test_path_exits_box():
    f = field_for(Params(0.5, 0.5), 2, 20, store="quadrant")
    with pytest.raises(PathExitsBox) as info:
        lpp.trace_competition_interface(f, 100)
    assert info.value.steps is not None and info.value.steps < 100


def test_psi_process():
    f = field_for(Params(0.5, 0.5), 9, 40)
    path = lpp.trace_competition_interface(f)
    psi = lpp.competition_event_process(path)
    assert psi(0.0) == (1, 1)
    t1 = path.times[1]
    assert psi(np.nextafter(t1, 0)) == (1, 1)
    assert psi(t1) == tuple(path.steps[1])
    with pytest.raises(HorizonError):
        psi(psi.horizon)
    pts = psi.at([0.0, t1, path.times[5]])
    assert pts[2].tolist() == path.steps[5].tolist()


def test_growth_interface():
    f = field_for(Params(1.0, 0.0), 6, 80)
    assert lpp.growth_interface_at(f, 0.0) == f.profile
    t_mid = 0.5 * f.safe_horizon()
    g1 = lpp.growth_interface_at(f, 0.5 * t_mid)
    g2 = lpp.growth_interface_at(f, t_mid)
    # later interfaces lie weakly above-right: compare column tops
    cols = np.arange(0, 81)
    assert np.all(g2.column_tops(0, 80) >= g1.column_tops(0, 80))
    # every occupied site is below the interface, every vacant one above
    inside = f.interior_mask()
    tops = g2.column_tops(0, 80)
    ys = np.arange(f.y_lo, f.top + 1)[:, None]
    occupied = (f.G <= t_mid) & inside
    assert np.all(ys[:, 0][:, None].repeat(cols.size, 1)[occupied] <= tops[None, :].repeat(ys.size, 0)[occupied])
    with pytest.raises(HorizonError):
        lpp.growth_interface_at(f, f.safe_horizon())


def test_backward_polymer():
    f = field_for(Params(0.5, 0.5), 10, 120, store=(70, 70))
    poly = lpp.trace_backward_polymer(f, (120, 120), 50)
    assert len(poly.path) == 51
    full = field_for(Params(0.5, 0.5), 10, 120)
    geo = lpp.backtrack_geodesic(full, (120, 120))
    assert np.array_equal(poly.path, geo.path[:51])
    with pytest.raises(PathExitsBox):
        lpp.trace_backward_polymer(full, (3, 2), 50)


@pytest.mark.parametrize("params", PARAM_GRID)
def test_python_kernels_match_compiled(params):
    f = field_for(params, 31, 30)
    out = np.zeros_like(f.G)
    n = _pykernels.passage_sweep(f.row_start, f.x_lo, f.y_lo, f.top, f.weights.seed,
                                 np.zeros((0, 0)), False, f.x_lo, f.y_lo, out)
    assert n == f.interior_count and np.array_equal(out, f.G)
    a = lpp._boundary_labels(f)
    b = a.copy()
    kernels.label_sweep(f.G, f.row_start, f.x_lo, f.y_lo, f.top, a)
    _pykernels.label_sweep(f.G, f.row_start, f.x_lo, f.y_lo, f.top, b)
    assert np.array_equal(a, b)
