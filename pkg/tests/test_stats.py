import numpy as np
import pytest
from scipy import stats as st

from competition_lab import hydro
from competition_lab.errors import PathExitsBox, ReplicaError
from competition_lab.experiments import speed_replica
from competition_lab.model import Params
from competition_lab.rng import replica_stream
from competition_lab.stats import (
    ExperimentSpec,
    ensemble_variances,
    exponent_regression,
    ks_distance,
    ks_two_sample,
    normality_check,
    profile_l1,
    run_replicas,
)
from competition_lab.tasep import DensityProfile


def _draw(stream, scale):
    return {"x": float(stream.generator().standard_normal() * scale)}


def _boom(stream):
    if stream.seed % 3 == 0:
        raise PathExitsBox("out", steps=1)
    return {}


def test_ks_quantile_sample():
    law = hydro.Uniform(-0.6, 0.6)
    n = 200
    x = law.quantile((np.arange(1, n + 1) - 0.5) / n)
    assert ks_distance(x, law) == pytest.approx(1 / (2 * n))
    assert ks_distance([-5.0, -4.0], law) == 1.0
    with pytest.raises(ValueError):
        ks_distance([], law)


def test_ks_point_mass():
    assert ks_distance([0.0] * 50, hydro.PointMass(0.0)) == 0.0
    assert ks_distance([0.0] * 50 + [1.0] * 50, hydro.PointMass(0.0)) == pytest.approx(0.5)


def test_ks_uniform_sampler():
    law = hydro.Uniform(-0.6, 0.6)
    assert ks_distance(law.sample(1000, np.random.default_rng(5)), law) <= 0.05


def test_ks_matches_scipy():
    x = np.random.default_rng(1).normal(size=300)
    assert ks_distance(x, st.norm.cdf) == pytest.approx(st.kstest(x, "norm").statistic, abs=1e-12)


def test_ks_two_sample():
    g = np.random.default_rng(9)
    d, p = ks_two_sample(g.normal(size=500), g.normal(size=500))
    assert 0 <= d <= 1 and p > 0.001


@pytest.mark.parametrize("power", [4 / 3, 1.0])
def test_regression_exact(power):
    t = np.array([125, 250, 500, 1000, 2000.0])
    res = exponent_regression(t, 3.7 * t**power)
    assert res.slope == pytest.approx(power, abs=1e-12)
    assert res.n_points == 5


def test_regression_errors():
    with pytest.raises(ValueError):
        exponent_regression([1, 2, 3], [1, 0, 2])
    with pytest.raises(ValueError):
        exponent_regression([1, 2], [1, 2])


def test_normality():
    n = 2000
    z = st.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    res = normality_check(z)
    assert res.passed and abs(res.skewness) < 1e-12 and abs(res.excess_kurtosis) < 0.05
    e = st.expon.ppf((np.arange(1, n + 1) - 0.5) / n)
    bad = normality_check(e)
    assert not bad.passed and bad.skewness == pytest.approx(2.0, abs=0.2)
    with pytest.raises(ValueError):
        normality_check(z[:50])


def _profile(values, k_lo, w=0.1):
    occ = np.round(np.asarray(values) * 1000).astype(int)
    return DensityProfile(1.0, w, k_lo, occ, np.full(len(values), 1000))


def test_profile_l1_zero():
    p = Params(0.8, 0.2)
    k = np.arange(-12, 13)
    prof = _profile(hydro.burgers_u(p, k * 0.1), -12)
    assert profile_l1(prof, lambda r: hydro.burgers_u(p, r)) == pytest.approx(0.0, abs=1e-3)
    flat = _profile(np.full(25, 0.5), -12)
    assert profile_l1(flat, lambda r: hydro.burgers_u(Params(0.5, 0.5), r)) == 0.0


def test_profile_l1_weights_and_exclusion():
    prof = _profile(np.full(21, 0.6), -10)
    assert profile_l1(prof, lambda r: np.full_like(r, 0.5)) == pytest.approx(0.2)
    assert profile_l1(prof, lambda r: np.full_like(r, 0.5), exclude=(0.0, 0.05)) == pytest.approx(0.19)
    with pytest.raises(ValueError):
        profile_l1(prof, lambda r: r, r_range=(5, 6))


def test_profile_l1_missing_bins():
    prof = DensityProfile(1.0, 0.1, -1, np.array([1, 0, 1]), np.array([2, 0, 2]))
    assert profile_l1(prof, lambda r: np.full_like(r, 0.5)) == 0.0
    with pytest.raises(ValueError):
        profile_l1(prof, lambda r: np.full_like(r, 0.5), require_full=True)


def test_ensemble_variances():
    x = np.array([[1.0, 2.0], [3.0, 6.0], [5.0, 10.0]])
    assert ensemble_variances(x).tolist() == [4.0, 16.0]


def test_run_replicas_order_and_workers():
    a = run_replicas(_draw, 12, 77, args=(2.0,), workers=1)
    b = run_replicas(_draw, 12, 77, args=(2.0,), workers=2)
    assert a == b
    assert [r["replica"] for r in a] == list(range(12))
    assert a[3]["seed"] == replica_stream(77, 3).seed
    assert run_replicas(_draw, 4, 77, args=(2.0,), workers=1, start=8) == a[8:]


def test_single_replica_is_direct_call():
    p = Params(0.8, 0.2)
    spec = ExperimentSpec(p, "speed", 100.0, 1, 5, (50.0, 100.0))
    rec = run_replicas(spec, workers=1)[0]
    direct = speed_replica(replica_stream(5, 0), p, 100.0, (50.0, 100.0))
    assert {k: rec[k] for k in direct} == direct


def test_replica_error_carries_index():
    seeds = [replica_stream(3, i).seed % 3 for i in range(10)]
    first = seeds.index(0)
    with pytest.raises(ReplicaError) as info:
        run_replicas(_boom, 10, 3, workers=1)
    assert info.value.index == first


def test_experiment_spec_validation():
    from competition_lab.errors import InvalidParams

    with pytest.raises(InvalidParams):
        ExperimentSpec(Params(0.5, 0.5), "nope", 10, 1, 0)
    with pytest.raises(InvalidParams):
        ExperimentSpec(Params(0.5, 0.5), "speed", 10, 1, 0, (20.0,))
