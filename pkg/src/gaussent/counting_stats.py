"""Shot sampling, factorial-moment estimators, bootstrap and end-to-end analysis.

A dataset is a list of per-shot counts ``(n1, n2)``.  Every estimator here is a
weighted mean over the distinct count pairs, so a bootstrap replicate is just a
multinomial reweighting of the histogram; this is the same as resampling shots.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlations import (
    G2_DEGENERACY,
    CorrelationObservables,
    EntanglementReport,
    beta_from_theta,
    criterion_from_counts,
    g4_from_theta,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DomainError,
    HypothesisError,
    HypothesisWarning,
    ThetaRangeError,
)
from .fock_oracle.states import JointNumberDistribution
from .gaussian_core import (
    StateClass,
    ThermalTwoModeState,
    classify_spectrum,
    log_negativity,
    symplectic_spectrum,
)
from .witnesses import WitnessVerdict, witness_classify, worker_count

SAMPLE_CHUNK = 1 << 17
BOOTSTRAP_CHUNK = 100
MIN_REPLICATES = 100
CSV_HEADER = ("shot_id", "n1", "n2")


@dataclass(frozen=True)
class CountRecord:
    shot_id: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("shot_id", "n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
            object.__setattr__(self, name, int(value))


class CountDataset:
    """Ordered shots stored column-wise.

    ``metadata`` carries ``eta`` (declared efficiency), ``source`` and
    optionally ``seed``.
    """

    def __init__(self, n1, n2, shot_id=None, metadata=None):
        self.n1 = np.asarray(n1, dtype=np.int64)
        self.n2 = np.asarray(n2, dtype=np.int64)
        if self.n1.shape != self.n2.shape or self.n1.ndim != 1:
            raise DomainError("n1 and n2 must be 1-d arrays of equal length")
        if shot_id is None:
            shot_id = np.arange(len(self.n1), dtype=np.int64)
        self.shot_id = np.asarray(shot_id, dtype=np.int64)
        if self.shot_id.shape != self.n1.shape:
            raise DomainError("shot_id length differs from the counts")
        if len(self.n1) and (self.n1.min() < 0 or self.n2.min() < 0 or self.shot_id.min() < 0):
            raise DomainError("counts and shot ids must be non-negative")
        if len(np.unique(self.shot_id)) != len(self.shot_id):
            raise DomainError("shot ids must be unique")
        self.metadata = dict(metadata or {})

    @classmethod
    def from_records(cls, records, metadata=None):
        records = list(records)
        return cls([r.n1 for r in records], [r.n2 for r in records],
                   [r.shot_id for r in records], metadata)

    @property
    def records(self):
        return [CountRecord(int(s), int(a), int(b))
                for s, a, b in zip(self.shot_id, self.n1, self.n2)]

    @property
    def eta(self) -> float:
        return float(self.metadata.get("eta", 1.0))

    def __len__(self):
        return len(self.n1)

    def __eq__(self, other):
        if not isinstance(other, CountDataset):
            return NotImplemented
        return (np.array_equal(self.n1, other.n1) and np.array_equal(self.n2, other.n2)
                and np.array_equal(self.shot_id, other.shot_id)
                and self.metadata == other.metadata)

    def histogram(self):
        """Distinct count pairs and their multiplicities."""
        pairs, counts = np.unique(np.stack([self.n1, self.n2], axis=1), axis=0,
                                  return_counts=True)
        return pairs[:, 0].astype(float), pairs[:, 1].astype(float), counts


@dataclass(frozen=True)
class EstimateWithCI:
    point: float
    ci_low: float
    ci_high: float
    bootstrap_replicates: int
    sigma: float = 0.0

    def __post_init__(self):
        bounded = not (math.isnan(self.ci_low) or math.isnan(self.ci_high))
        if math.isfinite(self.point) and bounded and not (self.ci_low <= self.point <= self.ci_high):
            raise DomainError(f"interval [{self.ci_low}, {self.ci_high}] misses {self.point}")

    @property
    def width(self):
        return self.ci_high - self.ci_low

    def contains(self, value) -> bool:
        return self.ci_low <= value <= self.ci_high


# -- sampling --------------------------------------------------------------------

def _chunk_sizes(total, chunk):
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _run_chunks(fn, jobs, workers=None):
    workers = workers or worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def sample_counts(dist: JointNumberDistribution, shots: int, eta: float = 1.0, seed: int = 0,
                  workers: int | None = None) -> CountDataset:
    """Draw ``shots`` i.i.d. count pairs and thin each count binomially with ``eta``.

    Shots are produced in fixed-size chunks, each with its own substream spawned
    from ``seed``; the output does not depend on the number of threads.
    """
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ConfigError(f"shots must be a positive integer, got {shots!r}")
    if not (0.0 < eta <= 1.0):
        raise ConfigError(f"eta must lie in (0, 1], got {eta!r}")
    probs = np.clip(np.asarray(dist.probs, dtype=float), 0.0, None)
    dim = probs.shape[1]
    cdf = np.cumsum(probs.ravel())
    cdf /= cdf[-1]
    sizes = _chunk_sizes(int(shots), SAMPLE_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def draw(job):
        size, stream = job
        rng = np.random.default_rng(stream)
        flat = np.searchsorted(cdf, rng.random(size), side="right")
        flat = np.minimum(flat, len(cdf) - 1)
        a, b = np.divmod(flat, dim)
        if eta < 1.0:
            a = rng.binomial(a, eta)
            b = rng.binomial(b, eta)
        return a, b

    parts = _run_chunks(draw, list(zip(sizes, streams)), workers)
    n1 = np.concatenate([p[0] for p in parts])
    n2 = np.concatenate([p[1] for p in parts])
    return CountDataset(n1, n2, metadata={"eta": float(eta), "source": "simulated", "seed": seed})


# -- estimators ------------------------------------------------------------------

_FIELDS = ("n1", "n2", "g2_12", "g4_12", "g2_1", "g2_2", "theta", "cs_ratio")


def _moments(a, b, w):
    """Plug-in estimators for every weight row in ``w`` (shape ``(k, pairs)``)."""
    w = np.atleast_2d(w).astype(float)
    total = w.sum(axis=1)
    mean = lambda f: (w @ f) / total  # noqa: E731
    m1, m2 = mean(a), mean(b)
    f1, f2 = a * (a - 1), b * (b - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g2 = mean(a * b) / (m1 * m2)
        g4 = mean(f1 * f2) / (m1 * m2) ** 2
        g2_1 = mean(f1) / m1**2
        g2_2 = mean(f2) / m2**2
        x = g2 - 1.0
        theta = (g4 - 4.0 * (1.0 + 4.0 * x + x * x)) / (2.0 * x * x)
        # no cross-correlation: theta is undefined rather than infinite
        theta = np.where(x > G2_DEGENERACY, theta, np.nan)
        cs = g2 / np.sqrt(g2_1 * g2_2)
    return {"n1": m1, "n2": m2, "g2_12": g2, "g4_12": g4, "g2_1": g2_1, "g2_2": g2_2,
            "theta": theta, "cs_ratio": cs}


def _replicate_weights(counts, replicates, seed, workers=None):
    """Multinomial resampling of the histogram, chunked over spawned substreams."""
    total = int(counts.sum())
    p = counts / total
    sizes = _chunk_sizes(replicates, BOOTSTRAP_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def draw(job):
        size, stream = job
        return np.random.default_rng(stream).multinomial(total, p, size=size)

    return np.concatenate(_run_chunks(draw, list(zip(sizes, streams)), workers))


def _interval(point, reps, replicates):
    good = reps[np.isfinite(reps)]
    if not math.isfinite(point) or len(good) == 0:
        return EstimateWithCI(point, math.nan, math.nan, replicates, math.nan)
    lo, hi = np.percentile(good, [2.5, 97.5])
    sigma = float(np.std(good, ddof=1)) if len(good) > 1 else 0.0
    return EstimateWithCI(float(point), float(min(lo, point)), float(max(hi, point)),
                          replicates, sigma)


def bootstrap_ci(data: CountDataset, statistic, replicates: int = 1000, seed: int = 0
                 ) -> EstimateWithCI:
    """Percentile bootstrap (2.5/97.5) of ``statistic(n1, n2, weights)``.

    ``statistic`` receives the distinct count pairs and their multiplicities
    and must return a float.
    """
    if replicates < MIN_REPLICATES:
        raise ConfigError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")
    if len(data) == 0:
        raise DomainError("empty dataset")
    a, b, counts = data.histogram()
    point = float(statistic(a, b, counts.astype(float)))
    W = _replicate_weights(counts, replicates, seed)
    reps = np.array([statistic(a, b, w.astype(float)) for w in W], dtype=float)
    return _interval(point, reps, replicates)


@dataclass(frozen=True)
class MomentEstimates:
    """Point values as :class:`CorrelationObservables` plus a CI per field."""

    observables: CorrelationObservables
    intervals: dict
    shots: int

    def __getitem__(self, name) -> EstimateWithCI:
        return self.intervals[name]


def estimate_moments(data: CountDataset, replicates: int = 1000, seed: int = 0
                     ) -> MomentEstimates:
    """Factorial-moment estimators with bootstrap intervals.

    Raises
    ------
    DomainError
        Fewer than two shots, or a mode with zero mean count.
    """
    if len(data) < 2:
        raise DomainError("need at least two shots")
    if replicates < MIN_REPLICATES:
        raise ConfigError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")
    a, b, counts = data.histogram()
    point = {k: float(v[0]) for k, v in _moments(a, b, counts).items()}
    if not (point["n1"] > 0 and point["n2"] > 0):
        raise DomainError("a mode has zero mean count; normalised correlations are undefined")
    reps = _moments(a, b, _replicate_weights(counts, replicates, seed))
    intervals = {k: _interval(point[k], reps[k], replicates) for k in _FIELDS}
    obs = CorrelationObservables(**{k: point[k] for k in _FIELDS})
    return MomentEstimates(obs, intervals, len(data))


@dataclass(frozen=True)
class ThermalCheck:
    passed: bool
    g2_1: EstimateWithCI | None
    g2_2: EstimateWithCI | None
    tolerance_sigma: float
    message: str = ""

    def __bool__(self):
        return self.passed


def _thermal_from(estimates: MomentEstimates, tolerance_sigma: float) -> ThermalCheck:
    verdicts = []
    for key in ("g2_1", "g2_2"):
        est = estimates[key]
        dev = abs(est.point - 2.0)
        verdicts.append(dev <= tolerance_sigma * est.sigma if math.isfinite(dev) else False)
    passed = all(verdicts)
    msg = "" if passed else (
        f"single-mode g2 = ({estimates['g2_1'].point:.4g} +- {estimates['g2_1'].sigma:.2g}, "
        f"{estimates['g2_2'].point:.4g} +- {estimates['g2_2'].sigma:.2g}) not compatible with 2")
    return ThermalCheck(passed, estimates["g2_1"], estimates["g2_2"], tolerance_sigma, msg)


def thermal_check(data: CountDataset, tolerance_sigma: float = 3.0, replicates: int = 1000,
                  seed: int = 0) -> ThermalCheck:
    """Are both single-mode ``g2_i`` within ``tolerance_sigma`` bootstrap sigma of 2?"""
    try:
        estimates = estimate_moments(data, replicates, seed)
    except DomainError as exc:
        return ThermalCheck(False, None, None, tolerance_sigma, str(exc))
    return _thermal_from(estimates, tolerance_sigma)


# -- end-to-end analysis ---------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisResult:
    report: EntanglementReport
    estimates: MomentEstimates
    witness: WitnessVerdict
    thermal: ThermalCheck
    lambda_minus: EstimateWithCI
    log_negativity: EstimateWithCI
    tau: float
    override_used: bool = False
    warnings: tuple = field(default=())

    @property
    def state_class(self) -> StateClass:
        return self.report.state_class

    @property
    def straddles_border(self) -> bool:
        lam = self.lambda_minus
        return bool(lam.ci_low < 1.0 < lam.ci_high)


def _spectrum_of(n1, n2, g2, theta):
    if not (n1 > 0 and n2 > 0) or not math.isfinite(g2):
        return None
    if g2 - 1.0 <= G2_DEGENERACY:
        # no cross-correlation: both moments vanish, as in the lenient criterion
        theta = 0.0
    if not math.isfinite(theta):
        return None
    theta = min(max(theta, 0.0), 1.0)
    bp = bm = 0.0
    if g2 > 1.0:
        beta = beta_from_theta(n1, n2, g2, theta)
        bp, bm = beta.beta_plus, beta.beta_minus
    try:
        return symplectic_spectrum(ThermalTwoModeState(n1, n2, bp, bm))
    except ArithmeticError:
        return None


def _clamped_report(obs: CorrelationObservables, eta, message) -> EntanglementReport:
    """Report for data whose theta leaves [0, 1]: class Unphysical, no identification."""
    n1, n2 = obs.n1 / eta, obs.n2 / eta
    theta = min(max(obs.theta, 0.0), 1.0)
    beta = beta_from_theta(n1, n2, obs.g2_12, theta)
    state = ThermalTwoModeState(n1, n2, beta.beta_plus, beta.beta_minus)
    return EntanglementReport(obs, beta, symplectic_spectrum(state), StateClass.UNPHYSICAL,
                              math.nan, eta, corrected_state=state, warnings=(message,))


def _nearest_physical(report, obs, eta, sigma_g2, sigma_theta, reach=3.0, steps=40):
    """Closest physical ``(g2, theta)`` within ``reach`` bootstrap sigma, if any.

    A two-mode squeezed vacuum sits on the border of the physical region, so
    sampling noise alone pushes about half of its estimates outside.  Distance
    is measured in units of the bootstrap sigma of each coordinate.
    """
    if not (math.isfinite(sigma_g2) and math.isfinite(sigma_theta)):
        return report
    g2s = obs.g2_12 + reach * sigma_g2 * np.linspace(-1.0, 1.0, steps + 1)
    thetas = obs.theta + reach * sigma_theta * np.linspace(-1.0, 1.0, steps + 1)
    # the physical region can be a thin sliver along theta = 0 or theta = 1
    thetas = np.concatenate([thetas, [0.0, 1.0]])
    candidates = []
    for g2 in g2s[g2s > 1.0]:
        for theta in thetas[(thetas >= 0.0) & (thetas <= 1.0)]:
            d2 = ((g2 - obs.g2_12) / max(sigma_g2, 1e-300)) ** 2
            d2 += ((theta - obs.theta) / max(sigma_theta, 1e-300)) ** 2
            if d2 <= reach**2:
                candidates.append((d2, float(g2), float(theta)))
    for _, g2, theta in sorted(candidates):
        try:
            trial = criterion_from_counts(obs.n1, obs.n2, g2, g4_from_theta(g2, theta), eta=eta,
                                          strict=False, g2_1=obs.g2_1, g2_2=obs.g2_2)
        except ArithmeticError:
            continue
        if trial.state_class is not StateClass.UNPHYSICAL:
            note = (f"estimate (g2_12={obs.g2_12:.6g}, theta={obs.theta:.6g}) lies outside the "
                    f"physical region; nearest physical point within {reach:g} bootstrap sigma "
                    f"(g2_12={g2:.6g}, theta={theta:.6g}) used")
            return dataclasses.replace(trial, observables=obs,
                                       warnings=trial.warnings + (note,))
    return report


def analyze(data: CountDataset, eta: float | None = None, override_thermal: bool = False,
            replicates: int = 1000, seed: int = 0, tolerance_sigma: float = 3.0
            ) -> AnalysisResult:
    """Counting data -> moments -> full criterion, with the two-body witness alongside.

    The theta tolerance is three bootstrap sigma.  Bootstrap intervals for
    ``lambda_minus`` and the log-negativity are attached and a verdict whose
    ``lambda_minus`` interval contains 1 is flagged.

    Raises
    ------
    HypothesisError
        The single-mode statistics are not thermal and ``override_thermal`` is False.
    """
    eta = data.eta if eta is None else float(eta)
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"detection efficiency must lie in (0, 1], got {eta!r}")
    notes = []
    estimates = estimate_moments(data, replicates, seed)
    thermal = _thermal_from(estimates, tolerance_sigma)
    if not thermal.passed:
        if not override_thermal:
            raise HypothesisError(thermal.message)
        note = "thermal single-mode check failed; analysis forced by override: " + thermal.message
        warnings.warn(note, HypothesisWarning, stacklevel=2)
        notes.append(note)

    obs = estimates.observables
    theta_sigma = estimates["theta"].sigma
    tau = max(3.0 * theta_sigma, 1e-9) if math.isfinite(theta_sigma) else 1e-9

    a, b, counts = data.histogram()
    reps = _moments(a, b, _replicate_weights(counts, replicates, seed + 1))
    spectra = [_spectrum_of(x / eta, y / eta, g, t) for x, y, g, t in
               zip(reps["n1"], reps["n2"], reps["g2_12"], reps["theta"])]
    # only replicates that are themselves physical enter the lambda_- interval
    lam_reps = np.array([sp.lambda_minus if sp and classify_spectrum(sp) is not
                         StateClass.UNPHYSICAL else math.nan for sp in spectra])

    try:
        report = criterion_from_counts(obs.n1, obs.n2, obs.g2_12, obs.g4_12, eta=eta, tau=tau,
                                       strict=False, g2_1=obs.g2_1, g2_2=obs.g2_2)
    except ThetaRangeError as exc:
        note = f"{exc} (tolerance is 3 bootstrap sigma)"
        warnings.warn(note, HypothesisWarning, stacklevel=2)
        notes.append(note)
        report = _clamped_report(obs, eta, note)
    if report.state_class is StateClass.UNPHYSICAL and math.isfinite(obs.theta):
        report = _nearest_physical(report, obs, eta, estimates["g2_12"].sigma, theta_sigma)
    notes.extend(report.warnings)
    unphysical = int(np.sum(np.isnan(lam_reps)))
    if unphysical:
        notes.append(f"{unphysical} of {replicates} bootstrap replicates are unphysical and "
                     "excluded from the lambda_minus interval")
    witness = witness_classify(obs.n1 / eta, obs.n2 / eta, obs.g2_12)

    lam_point = report.spectrum.lambda_minus if report.state_class is not StateClass.UNPHYSICAL \
        else math.nan
    lam_ci = _interval(lam_point, lam_reps, replicates)
    with np.errstate(divide="ignore", invalid="ignore"):
        ln_reps = np.where(lam_reps > 0, np.maximum(-np.log2(lam_reps), 0.0), np.nan)
    ln_point = log_negativity(lam_point) if lam_point > 0 else math.nan
    ln_ci = _interval(ln_point, ln_reps, replicates)
    if lam_ci.ci_low < 1.0 < lam_ci.ci_high:
        notes.append("lambda_minus interval contains 1: class not significant at 95%")

    seen = []
    for n in notes:
        if n not in seen:
            seen.append(n)
    return AnalysisResult(report, estimates, witness, thermal, lam_ci, ln_ci, tau,
                          override_used=not thermal.passed, warnings=tuple(seen))


# -- file formats --------------------------------------------------------------------

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_csv(data: CountDataset, path, sidecar: bool = True) -> None:
    """Write ``shot_id,n1,n2`` rows (LF endings) and the metadata sidecar."""
    lines = [",".join(CSV_HEADER)]
    lines.extend(f"{s},{a},{b}" for s, a, b in
                 zip(data.shot_id.tolist(), data.n1.tolist(), data.n2.tolist()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    if sidecar:
        meta = {"eta": data.eta, "source": str(data.metadata.get("source", ""))}
        if data.metadata.get("seed") is not None:
            meta["seed"] = data.metadata["seed"]
        sidecar_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def read_csv(path, metadata=None) -> CountDataset:
    """Parse a count file; the sidecar is read when present.

    Raises
    ------
    DataFormatError
        Bad header, non-integer or negative field, wrong field count or
        duplicate shot id; the message carries the line number.
    """
    path = Path(path)
    ids, c1, c2, where = [], [], [], []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataFormatError(f"expected header {','.join(CSV_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                s, a, b = (int(v) for v in row)
            except ValueError:
                raise DataFormatError(f"non-integer field in {row!r}", line=lineno) from None
            if s < 0 or a < 0 or b < 0:
                raise DataFormatError(f"negative value in {row!r}", line=lineno)
            ids.append(s)
            where.append(lineno)
            c1.append(a)
            c2.append(b)
    if len(set(ids)) != len(ids):
        seen = set()
        for lineno, s in zip(where, ids):
            if s in seen:
                raise DataFormatError(f"duplicate shot_id {s}", line=lineno)
            seen.add(s)
    meta = dict(metadata or {})
    side = sidecar_path(path)
    if not metadata and side.exists():
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"metadata sidecar {side}: {exc}") from None
        if not isinstance(meta, dict):
            raise DataFormatError(f"metadata sidecar {side} is not an object")
    return CountDataset(c1, c2, ids, meta)
