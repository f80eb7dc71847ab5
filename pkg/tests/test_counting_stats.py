import json
import math
import warnings

import numpy as np
import pytest

from gaussent.correlations import beta_from_theta
from gaussent.counting_stats import (
    CountDataset,
    CountRecord,
    EstimateWithCI,
    analyze,
    bootstrap_ci,
    estimate_moments,
    read_csv,
    sample_counts,
    sidecar_path,
    thermal_check,
    write_csv,
)
from gaussent.errors import (
    ConfigError,
    DataFormatError,
    DomainError,
    HypothesisError,
    HypothesisWarning,
)
from gaussent.fock_oracle import joint_distribution, number_moments, synthesize_state
from gaussent.fock_oracle.states import JointNumberDistribution
from gaussent.gaussian_core import StateClass, ThermalTwoModeState, classify, symplectic_spectrum
from gaussent.witnesses import Verdict


def point_mass(n1, n2, dim=5):
    P = np.zeros((dim, dim))
    P[n1, n2] = 1.0
    return JointNumberDistribution(P, dim - 1, 0.0)


def dist_of(state, **kw):
    return joint_distribution(synthesize_state(state, **kw))


def mean_of(a, b, w):
    return float(w @ a / w.sum())


@pytest.fixture(scope="module")
def tmsv_dist():
    return dist_of(ThermalTwoModeState.tmsv(1.0))


@pytest.fixture(scope="module")
def thermal_dist():
    return dist_of(ThermalTwoModeState.thermal(0.6, 0.4))


# -- records -------------------------------------------------------------------

def test_count_record_validation():
    assert CountRecord(0, 2, 3).n2 == 3
    for bad in [(0, -1, 0), (0, 1.5, 0), (-1, 0, 0), (0, True, 0)]:
        with pytest.raises(DomainError):
            CountRecord(*bad)


def test_dataset_validation():
    with pytest.raises(DomainError):
        CountDataset([1, 2], [1, 2], shot_id=[0, 0])
    with pytest.raises(DomainError):
        CountDataset([1, -2], [1, 2])
    with pytest.raises(DomainError):
        CountDataset([1, 2], [1])
    d = CountDataset.from_records([CountRecord(5, 1, 2), CountRecord(7, 0, 0)], {"eta": 0.5})
    assert d.eta == 0.5 and d.records[1] == CountRecord(7, 0, 0)


# -- sampling ----------------------------------------------------------------

def test_point_mass_sampling():
    d = sample_counts(point_mass(2, 3), 1000, seed=1)
    assert np.all(d.n1 == 2) and np.all(d.n2 == 3)
    assert d.metadata == {"eta": 1.0, "source": "simulated", "seed": 1}


def test_thinning_fraction():
    shots = 200_000
    d = sample_counts(point_mass(1, 0), shots, eta=0.5, seed=2)
    frac = d.n1.mean()
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / shots)
    assert np.all(d.n2 == 0)


def test_sampling_deterministic(tmsv_dist):
    a = sample_counts(tmsv_dist, 300_000, eta=0.7, seed=5, workers=1)
    b = sample_counts(tmsv_dist, 300_000, eta=0.7, seed=5, workers=4)
    c = sample_counts(tmsv_dist, 300_000, eta=0.7, seed=6)
    assert a == b
    assert not np.array_equal(a.n1, c.n1)


def test_sampling_config_errors(tmsv_dist):
    for shots in (0, -3, 2.5):
        with pytest.raises(ConfigError):
            sample_counts(tmsv_dist, shots)
    for eta in (0.0, 1.2):
        with pytest.raises(ConfigError):
            sample_counts(tmsv_dist, 10, eta=eta)


# -- estimators ----------------------------------------------------------------

def test_identical_records():
    est = estimate_moments(CountDataset([1] * 50, [1] * 50), replicates=100)
    assert est.observables.g2_12 == 1.0
    assert est.observables.g4_12 == 0.0
    assert est["g2_12"].width == 0.0
    assert math.isnan(est.observables.theta)


def test_anticorrelated_records():
    est = estimate_moments(CountDataset([2, 0], [0, 2]), replicates=100)
    assert est.observables.n1 == 1.0 and est.observables.n2 == 1.0
    assert est.observables.g2_12 == 0.0


def test_estimator_errors():
    with pytest.raises(DomainError):
        estimate_moments(CountDataset([0, 0, 0], [1, 2, 0]))
    with pytest.raises(DomainError):
        estimate_moments(CountDataset([1], [1]))
    with pytest.raises(ConfigError):
        estimate_moments(CountDataset([1, 2], [1, 2]), replicates=10)


def test_estimate_with_ci_contract():
    with pytest.raises(DomainError):
        EstimateWithCI(2.0, 0.0, 1.0, 100)
    e = EstimateWithCI(1.0, 0.5, 1.5, 100)
    assert e.contains(1.2) and not e.contains(2.0) and e.width == 1.0


def test_bootstrap_constant_statistic():
    d = CountDataset(np.arange(100) % 3, np.arange(100) % 2)
    ci = bootstrap_ci(d, lambda a, b, w: 4.2, replicates=200)
    assert ci.point == ci.ci_low == ci.ci_high == 4.2


def test_bootstrap_deterministic():
    rng = np.random.default_rng(0)
    d = CountDataset(rng.poisson(1.0, 5000), rng.poisson(2.0, 5000))
    one = bootstrap_ci(d, mean_of, replicates=300, seed=9)
    two = bootstrap_ci(d, mean_of, replicates=300, seed=9)
    assert one == two
    with pytest.raises(ConfigError):
        bootstrap_ci(d, mean_of, replicates=99)


def test_bootstrap_width_scaling():
    rng = np.random.default_rng(1)
    widths = []
    for shots in (1_000, 100_000):
        d = CountDataset(rng.geometric(0.4, shots) - 1, rng.geometric(0.5, shots) - 1)
        widths.append(bootstrap_ci(d, mean_of, replicates=500, seed=2).width)
    # 1/sqrt(shots) predicts a factor of 10
    assert 7 < widths[0] / widths[1] < 14


def test_consistency_against_oracle():
    # median error over seeds shrinks with the number of shots
    state = ThermalTwoModeState(0.4, 0.3, 0.3, 0.1)
    dist = dist_of(state)
    truth = number_moments(dist)[0]
    medians = []
    for shots in (10_000, 100_000, 1_000_000):
        errs = []
        for seed in range(10):
            d = sample_counts(dist, shots, seed=seed)
            a, b = d.n1.astype(float), d.n2.astype(float)
            errs.append(abs(np.mean(a * b) / (a.mean() * b.mean()) - truth))
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]


def test_eta_invariance_of_normalised_estimates():
    dist = dist_of(ThermalTwoModeState.tmsv(0.5))
    full = estimate_moments(sample_counts(dist, 400_000, seed=3), replicates=300, seed=1)
    lossy = estimate_moments(sample_counts(dist, 400_000, eta=0.6, seed=4), replicates=300, seed=1)
    for key in ("g2_12", "g4_12", "g2_1", "g2_2"):
        a, b = full[key], lossy[key]
        assert abs(a.point - b.point) <= 3 * math.hypot(a.sigma, b.sigma), key
    for key in ("n1", "n2"):
        a, b = full[key], lossy[key]
        assert abs(b.point - 0.6 * 0.5) <= 3 * b.sigma
        assert abs(b.point - 0.6 * a.point) <= 3 * math.hypot(b.sigma, 0.6 * a.sigma)


# -- thermal check -------------------------------------------------------------

def test_thermal_check_thermal_data(thermal_dist):
    res = thermal_check(sample_counts(thermal_dist, 200_000, seed=7), replicates=300)
    assert res.passed and bool(res)


def test_thermal_check_point_mass():
    res = thermal_check(sample_counts(point_mass(2, 3), 1000), replicates=100)
    assert not res
    assert res.g2_1.point == pytest.approx(0.5)


def test_thermal_check_poisson():
    rng = np.random.default_rng(8)
    d = CountDataset(rng.poisson(0.8, 100_000), rng.poisson(0.5, 100_000))
    res = thermal_check(d, replicates=200)
    assert not res and "not compatible" in res.message


def test_thermal_check_empty_mode():
    assert not thermal_check(CountDataset([0, 0], [1, 2]), replicates=100)


# -- analysis -----------------------------------------------------------------

def test_analyze_thermal_product(thermal_dist):
    res = analyze(sample_counts(thermal_dist, 1_000_000, seed=11), replicates=300, seed=11)
    assert res.state_class is StateClass.SEPARABLE
    assert res.witness.verdict is Verdict.SEPARABLE
    assert res.log_negativity.point == 0.0


def test_analyze_tmsv(tmsv_dist):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        res = analyze(sample_counts(tmsv_dist, 1_000_000, seed=12), seed=12)
    assert res.state_class is StateClass.ENTANGLED
    assert res.witness.verdict is Verdict.ENTANGLED
    ln = res.log_negativity
    exact = 2 * math.log2(math.sqrt(2) + 1)
    # the state is the largest-LN state at its population, so the spread is one-sided
    assert abs(ln.point - exact) <= 3 * ln.sigma
    assert ln.ci_low > 2.3
    assert res.report.identified_pair_moment == pytest.approx(math.sqrt(2), rel=0.02)


def test_analyze_efficiency_example():
    # measured n = 0.3 at eta = 1/3 from a state with (g2 = 2.03, theta = 0.5) at n = 0.9
    b = beta_from_theta(0.9, 0.9, 2.03, 0.5)
    state = ThermalTwoModeState(0.9, 0.9, b.beta_plus, b.beta_minus)
    assert classify(state) is StateClass.ENTANGLED
    data = sample_counts(dist_of(state, tail_bound=1e-8), 1_000_000, eta=1 / 3, seed=13)
    res = analyze(data, replicates=300, seed=13)
    assert data.eta == pytest.approx(1 / 3)
    assert res.report.eta_used == pytest.approx(1 / 3)
    assert res.estimates.observables.n1 == pytest.approx(0.3, abs=0.005)
    # interval on lambda_- reflects how close to the border the state is
    lam = symplectic_spectrum(state).lambda_minus
    assert res.lambda_minus.ci_low <= lam + 3 * res.lambda_minus.sigma


def test_analyze_hypothesis_rejected():
    rng = np.random.default_rng(14)
    d = CountDataset(rng.poisson(0.8, 50_000), rng.poisson(0.5, 50_000))
    with pytest.raises(HypothesisError):
        analyze(d, replicates=200)
    with pytest.warns(HypothesisWarning):
        res = analyze(d, override_thermal=True, replicates=200)
    assert res.override_used and any("override" in w for w in res.warnings)


def test_analyze_bad_eta(thermal_dist):
    d = sample_counts(thermal_dist, 1000)
    with pytest.raises(DomainError):
        analyze(d, eta=0.0, replicates=100)


@pytest.mark.slow
@pytest.mark.parametrize("state", [
    ThermalTwoModeState(0.5, 0.5, 0.62, 0.1),
    ThermalTwoModeState(0.5, 0.5, 0.2, 0.3),
])
def test_analyze_reproduces_class(state):
    expected = classify(state)
    dist = dist_of(state)
    hits = 0
    for seed in range(20):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            res = analyze(sample_counts(dist, 200_000, seed=100 + seed), replicates=200,
                          seed=seed)
        hits += res.state_class is expected
    assert hits >= 19


# -- files ---------------------------------------------------------------------

def test_csv_round_trip(tmp_path, tmsv_dist):
    d = sample_counts(tmsv_dist, 500, eta=0.8, seed=3)
    path = tmp_path / "counts.csv"
    write_csv(d, path)
    raw = path.read_bytes()
    assert raw.startswith(b"shot_id,n1,n2\n") and b"\r" not in raw
    assert json.loads(sidecar_path(path).read_text()) == {"eta": 0.8, "seed": 3,
                                                          "source": "simulated"}
    assert read_csv(path) == d


def test_csv_without_sidecar(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("shot_id,n1,n2\n0,1,2\n1,0,0\n")
    d = read_csv(path)
    assert d.eta == 1.0 and len(d) == 2
    assert read_csv(path, metadata={"eta": 0.5}).eta == 0.5


@pytest.mark.parametrize("body,line", [
    ("shot,n1,n2\n0,1,1\n", 1),
    ("shot_id,n1,n2\n0,1,1\n1,x,2\n", 3),
    ("shot_id,n1,n2\n0,1,1\n1,2\n", 3),
    ("shot_id,n1,n2\n0,1,1\n1,-2,0\n", 3),
    ("shot_id,n1,n2\n0,1,1\n\n0,2,2\n", 4),
    ("shot_id,n1,n2\n0,1,1\n1,1.5,0\n", 3),
])
def test_csv_errors_carry_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(DataFormatError) as info:
        read_csv(path)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)
