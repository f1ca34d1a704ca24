import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from competition_lab import rng
from competition_lab.errors import InvalidParams, MalformedProfile, UncoveredSite
from competition_lab.model import (
    InterfaceProfile,
    Params,
    Regime,
    TasepConfig,
    WeightField,
    hashed_weights,
    interface_to_tasep,
    sample_initial_interface,
    sample_weights,
    tasep_to_interface,
)


@pytest.mark.parametrize("lam,rho", [(0.0, 0.5), (1.1, 0.5), (0.5, 1.0), (0.5, -0.1)])
def test_params_reject_out_of_range(lam, rho):
    with pytest.raises(InvalidParams):
        Params(lam, rho)


def test_regimes():
    assert Params(0.3, 0.7).regime is Regime.SHOCK
    assert Params(0.5, 0.5).regime is Regime.STATIONARY
    assert Params(0.8, 0.2).regime is Regime.RAREFACTION


def test_sector_angles():
    assert Params(1.0, 0.0).theta == pytest.approx(90.0)
    assert Params(0.5, 0.5).theta == pytest.approx(180.0)
    # direct vector arithmetic: angle of (-0.8, 0.2) minus angle of (0.2, -0.8)
    expected = math.degrees(math.atan2(0.2, -0.8) - math.atan2(-0.8, 0.2))
    assert Params(0.2, 0.8).theta == pytest.approx(expected, abs=1e-12)
    assert Params(0.2, 0.8).theta == pytest.approx(241.9275130641, abs=1e-9)


def test_profile_rejects_bad_increments():
    with pytest.raises(MalformedProfile):
        InterfaceProfile(0, [0, 2, 3])
    with pytest.raises(MalformedProfile):
        InterfaceProfile(0, [3, 2])
    with pytest.raises(MalformedProfile):
        InterfaceProfile.from_points([(0, 1), (2, 1)])


def test_profile_points_and_columns():
    prof = InterfaceProfile.from_points([(0, 3), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (3, 0)])
    assert prof.j_min == -3
    assert prof.point(0) == (2, 2)
    assert np.array_equal(prof.y, [3, 2, 2, 2, 1, 0, 0])
    assert prof.column_tops(0, 3).tolist() == [3, 2, 2, 0]
    with pytest.raises(UncoveredSite):
        prof.column_tops(-1, 2)


def test_initial_interface_frozen(stream):
    prof = sample_initial_interface(Params(0.5, 0.5), 20, stream)
    assert prof.j_min == -51
    assert prof.x[:6].tolist() == [-30, -30, -29, -29, -29, -28]
    assert prof.x[-6:].tolist() == [16, 17, 18, 19, 20, 21]
    assert prof.point(-1) == (0, 1) and prof.point(0) == (1, 1) and prof.point(1) == (1, 0)


@pytest.mark.parametrize("lam,rho", [(0.3, 0.7), (0.8, 0.2), (1.0, 0.0), (0.05, 0.95)])
def test_initial_interface_geometry(lam, rho):
    prof = sample_initial_interface(Params(lam, rho), 30, rng.RngStream(11))
    assert prof.point(-1) == (0, 1) and prof.point(0) == (1, 1) and prof.point(1) == (1, 0)
    ys = prof.y
    assert ys[0] == 31 and prof.x[-1] == 31
    # the upper arm ends on an up step and the lower arm on a right step
    assert ys[0] - ys[1] == 1 and prof.x[-1] - prof.x[-2] == 1


def test_axes_when_lambda_one_rho_zero():
    prof = sample_initial_interface(Params(1.0, 0.0), 10, rng.RngStream(1))
    pts = prof.points()
    assert np.all(pts[pts[:, 1] >= 1][:, 0] <= 1)
    assert np.all(prof.x[: 11] == 0)
    assert np.all(prof.y[-11:] == 0)


def test_initial_interface_prefix_consistent():
    s = rng.RngStream(77)
    small = sample_initial_interface(Params(0.4, 0.6), 40, s)
    big = sample_initial_interface(Params(0.4, 0.6), 90, s)
    off = small.j_min - big.j_min
    assert np.array_equal(big.x[off : off + len(small)], small.x)


def test_arm_densities():
    prof = sample_initial_interface(Params(0.3, 0.7), 20000, rng.RngStream(5))
    cfg = interface_to_tasep(prof)
    occ = cfg.occupancy
    sites = np.arange(cfg.lo, cfg.hi + 1)
    left = occ[sites < 0]
    right = occ[sites > 1]
    assert abs(left.mean() - 0.3) < 0.01
    assert abs(right.mean() - 0.7) < 0.01


def test_tasep_mapping_corner():
    prof = sample_initial_interface(Params(0.5, 0.5), 10, rng.RngStream(3))
    cfg = interface_to_tasep(prof)
    assert cfg[0] == 0 and cfg[1] == 1
    assert cfg.star_pair_site == 0 and cfg.labels == (1, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=60), st.integers(-30, 30), st.integers(-30, 30))
def test_tasep_roundtrip(steps, j0, x0):
    x = np.concatenate([[x0], x0 + np.cumsum(np.where(steps, 0, 1))])
    prof = InterfaceProfile(j0, x)
    assert tasep_to_interface(interface_to_tasep(prof)) == prof


def test_tasep_config_validation():
    with pytest.raises(MalformedProfile):
        TasepConfig(0, [0, 2, 1])


def test_weight_fields_agree(stream):
    box = (-5, 5, -4, 6)
    mat = sample_weights(box, stream)
    hashed = hashed_weights(stream)
    for x in range(-5, 6):
        for y in range(-4, 7):
            assert mat.value(x, y) == hashed.value(x, y)
    with pytest.raises(UncoveredSite):
        mat.value(6, 0)
    assert np.array_equal(mat.block(-2, 3, 0, 2), hashed.block(-2, 3, 0, 2))


def test_weight_field_constant():
    w = WeightField.constant((0, 3, 0, 3), 2.0)
    assert w.value(3, 3) == 2.0
    assert not w.covers(0, 4, 0, 3)
