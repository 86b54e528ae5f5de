"""Statistical audits: deviation checks, an empirical privacy probe, and the
end-to-end Boolean experiment.

Each check replays one guarantee of the pipeline with fresh randomness and
compares the observed failure rate against its stated bound plus three
binomial standard errors, so a healthy implementation passes with margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, QueryFamily, accuracy_error, evaluate_all
from .distributions import (
    ProductDistribution,
    exact_statistics,
    renyi_condition_number_exact,
)
from .mechanism import laplace_vector
from .queries import marginal_family
from .synth import PipelineConfig, generate

DEFAULT_AUDIT_SLACK = 0.15
# A histogram cell with a zero count on one side is only treated as evidence
# when at least this many observations landed in it overall.
MIN_CELL_OCCUPANCY = 10


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


@dataclass(frozen=True)
class ReweightedMeasure:
    """Importance-weighted empirical measure: weight ratio(z)/m on each draw.

    The weights are unnormalized; their sum ``total_mass`` concentrates near 1
    when the sampling distribution covers the population well.
    """

    support: Dataset
    weights: np.ndarray
    total_mass: float

    def statistics(self, queries: QueryFamily) -> np.ndarray:
        rows = self.support.rows
        w = self.weights
        return np.array([math.fsum(f.values(rows) * w) for f in queries], dtype=float)


def reweighted_measure(population, sampling, draws: Dataset) -> ReweightedMeasure:
    """Build the importance-weighted measure for draws taken from ``sampling``."""
    num = population.mass_many(draws.rows)
    den = sampling.mass_many(draws.rows)
    if (den == 0).any():
        raise ValueError("draws must lie in the sampling distribution's support")
    weights = num / den / len(draws)
    return ReweightedMeasure(
        support=draws, weights=weights, total_mass=math.fsum(weights)
    )


@dataclass(frozen=True)
class DeviationCheckResult:
    failure_rate: float
    gate: float
    threshold_n: float
    trials: int
    passed: bool

    def report_text(self) -> str:
        lines = [
            f"lemma3_failure_rate = {_fmt(self.failure_rate)}",
            f"lemma3_gate = {_fmt(self.gate)}",
            f"lemma3_threshold_n = {_fmt(self.threshold_n)}",
            f"lemma3_trials = {_fmt(self.trials)}",
            f"lemma3_passed = {_fmt(self.passed)}",
        ]
        return "\n".join(lines) + "\n"


def deviation_check_empirical(
    population, queries: QueryFamily, n: int, delta: float, gamma: float,
    trials: int, rng,
) -> DeviationCheckResult:
    """Empirical check that n-sample statistics stay within delta of their means.

    The stated bound promises failure probability at most gamma once
    n >= ln(|F|/gamma)/delta^2; the audit compares the observed rate against
    gamma plus three binomial standard errors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    exact = exact_statistics(population, queries)
    failures = 0
    for _ in range(trials):
        sampled = population.sample(n, rng)
        stats = evaluate_all(queries, sampled)
        if np.max(np.abs(stats - exact)) > delta:
            failures += 1
    failure_rate = failures / trials
    gate = gamma + 3.0 * math.sqrt(gamma / trials)
    threshold_n = math.log(len(queries) / gamma) / delta**2
    return DeviationCheckResult(
        failure_rate=failure_rate,
        gate=gate,
        threshold_n=threshold_n,
        trials=trials,
        passed=failure_rate <= gate,
    )


@dataclass(frozen=True)
class ReweightedCheckResult:
    failure_rate: float
    mean_r: float
    gate: float
    mean_r_tolerance: float
    threshold_m: float
    trials: int
    passed: bool

    def report_text(self) -> str:
        lines = [
            f"lemma4_failure_rate = {_fmt(self.failure_rate)}",
            f"mean_r = {_fmt(self.mean_r)}",
            f"lemma4_gate = {_fmt(self.gate)}",
            f"mean_r_tolerance = {_fmt(self.mean_r_tolerance)}",
            f"lemma4_threshold_m = {_fmt(self.threshold_m)}",
            f"lemma4_trials = {_fmt(self.trials)}",
            f"lemma4_passed = {_fmt(self.passed)}",
        ]
        return "\n".join(lines) + "\n"


def reweighted_deviation_check(
    population, sampling, queries: QueryFamily, m: int, delta: float, gamma: float,
    trials: int, rng,
) -> ReweightedCheckResult:
    """Empirical check of the importance-weighted statistics and their total mass.

    Unbiasedness puts the mean of the total mass r at 1; the audit requires the
    observed mean over all trials to sit within three standard errors
    (variance at most kappa/m per trial) and the per-trial deviation failure
    rate to stay under gamma plus three binomial standard errors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    exact = exact_statistics(population, queries)
    kappa = renyi_condition_number_exact(population, sampling)
    failures = 0
    masses = []
    for _ in range(trials):
        draws = sampling.sample(m, rng)
        measure = reweighted_measure(population, sampling, draws)
        stats = measure.statistics(queries)
        if np.max(np.abs(stats - exact)) > delta:
            failures += 1
        masses.append(measure.total_mass)
    failure_rate = failures / trials
    mean_r = math.fsum(masses) / trials
    return ReweightedCheckResult(
        failure_rate=failure_rate,
        mean_r=mean_r,
        gate=gamma + 3.0 * math.sqrt(gamma / trials),
        mean_r_tolerance=3.0 * math.sqrt(kappa / (m * trials)),
        threshold_m=kappa * len(queries) / (gamma * delta**2),
        trials=trials,
        passed=failure_rate <= gamma + 3.0 * math.sqrt(gamma / trials)
        and abs(mean_r - 1.0) <= 3.0 * math.sqrt(kappa / (m * trials)),
    )


def _multiset_counts(data: Dataset):
    rows, counts = np.unique(data.rows, axis=0, return_counts=True)
    return {tuple(int(v) for v in row): int(c) for row, c in zip(rows, counts)}


def _check_neighbors(d1: Dataset, d2: Dataset) -> None:
    if d1.schema != d2.schema:
        raise ValueError("datasets must share a schema")
    if abs(len(d1) - len(d2)) > 1:
        raise ValueError("datasets are not add-one neighbors")
    small, large = (d1, d2) if len(d1) <= len(d2) else (d2, d1)
    cs, cl = _multiset_counts(small), _multiset_counts(large)
    extra = 0
    for row, count in cl.items():
        diff = count - cs.get(row, 0)
        if diff < 0:
            raise ValueError("datasets are not add-one neighbors")
        extra += diff
    if extra != len(large) - len(small):
        raise ValueError("datasets are not add-one neighbors")


@dataclass(frozen=True)
class PrivacyAuditResult:
    epsilon_hat: float
    epsilon_theoretical: float
    slack: float
    trials: int
    bins: int
    passed: bool

    def report_text(self) -> str:
        lines = [
            f"epsilon_hat = {_fmt(self.epsilon_hat)}",
            f"epsilon_theoretical = {_fmt(self.epsilon_theoretical)}",
            f"audit_slack = {_fmt(self.slack)}",
            f"dp_trials = {_fmt(self.trials)}",
            f"dp_bins = {_fmt(self.bins)}",
            f"dp_passed = {_fmt(self.passed)}",
        ]
        return "\n".join(lines) + "\n"


def privacy_audit(
    queries: QueryFamily, sigma: float, d1: Dataset, d2: Dataset,
    trials: int, bins: int, rng, slack: float = DEFAULT_AUDIT_SLACK,
) -> PrivacyAuditResult:
    """Histogram likelihood-ratio probe of the noisy-statistics release.

    Runs the Laplace stage on two neighboring datasets, discretizes the
    outputs with per-dimension equal-frequency bin edges taken from the
    combined samples, and reports the largest absolute log count ratio. Cells
    empty on one side are skipped while they hold fewer than
    MIN_CELL_OCCUPANCY observations in total; beyond that they count as
    evidence of a violation (infinite ratio).
    """
    if trials < 1 or bins < 2:
        raise ValueError("need trials >= 1 and bins >= 2")
    if len(queries) > 3:
        raise ValueError("histogram audit supports at most 3 statistics")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    _check_neighbors(d1, d2)
    rng = np.random.default_rng(rng)
    stats1 = evaluate_all(queries, d1)
    stats2 = evaluate_all(queries, d2)
    epsilon_theoretical = float(np.sum(np.abs(stats1 - stats2))) / sigma

    nf = len(queries)
    out1 = stats1 + laplace_vector(sigma, (trials, nf), rng)
    out2 = stats2 + laplace_vector(sigma, (trials, nf), rng)

    cell1 = np.zeros(trials, dtype=np.int64)
    cell2 = np.zeros(trials, dtype=np.int64)
    for j in range(nf):
        combined = np.concatenate([out1[:, j], out2[:, j]])
        inner = np.quantile(combined, np.arange(1, bins) / bins)
        idx1 = np.searchsorted(inner, out1[:, j], side="right")
        idx2 = np.searchsorted(inner, out2[:, j], side="right")
        cell1 = cell1 * bins + idx1
        cell2 = cell2 * bins + idx2
    total_cells = bins**nf
    counts1 = np.bincount(cell1, minlength=total_cells)
    counts2 = np.bincount(cell2, minlength=total_cells)

    both = (counts1 > 0) & (counts2 > 0)
    if both.any():
        ratios = np.abs(np.log(counts1[both] / counts2[both]))
        epsilon_hat = float(ratios.max())
    else:
        epsilon_hat = 0.0
    one_sided = (counts1 > 0) != (counts2 > 0)
    if (one_sided & (counts1 + counts2 >= MIN_CELL_OCCUPANCY)).any():
        epsilon_hat = math.inf
    return PrivacyAuditResult(
        epsilon_hat=epsilon_hat,
        epsilon_theoretical=epsilon_theoretical,
        slack=slack,
        trials=trials,
        bins=bins,
        passed=epsilon_hat <= epsilon_theoretical + slack,
    )


@dataclass(frozen=True)
class BooleanExperimentResult:
    errors: tuple[float, ...]
    fail_fraction: float
    gate: float
    error_threshold: float
    median_error: float
    trials: int
    passed: bool

    def report_text(self) -> str:
        lines = [
            f"corollary_pass = {_fmt(self.passed)}",
            f"corollary_fail_fraction = {_fmt(self.fail_fraction)}",
            f"corollary_gate = {_fmt(self.gate)}",
            f"corollary_error_threshold = {_fmt(self.error_threshold)}",
            f"corollary_median_error = {_fmt(self.median_error)}",
            f"corollary_trials = {_fmt(self.trials)}",
            f"errors = {','.join(_fmt(e) for e in self.errors)}",
        ]
        return "\n".join(lines) + "\n"


def boolean_experiment(
    p: int, d: int, n: int, k: int, m: int, delta: float, gamma: float,
    trials: int, seed: int,
) -> BooleanExperimentResult:
    """End-to-end accuracy experiment on the uniform Boolean cube.

    Each trial draws a fresh dataset from the uniform distribution, runs the
    full pipeline with monotone marginals of order d, and measures the worst
    statistic disagreement between real and synthetic data. The pass criterion
    allows errors above 8*delta in at most a 4*gamma fraction of trials, plus
    three binomial standard errors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    family = marginal_family(p, d, "monotone")
    uniform = ProductDistribution.uniform((2,) * p)
    trial_seeds = np.random.SeedSequence(seed).generate_state(2 * trials, np.uint32)
    errors = []
    for i in range(trials):
        data = uniform.sample(n, np.random.default_rng(int(trial_seeds[2 * i])))
        config = PipelineConfig(
            delta_target=delta,
            gamma=gamma,
            synthetic_size=k,
            reduced_size=m,
            seed=int(trial_seeds[2 * i + 1]),
            kappa_bound=1.0,
        )
        result = generate(data, family, uniform, config)
        errors.append(accuracy_error(family, data, result.synthetic))
    threshold = 8.0 * delta
    fail_fraction = sum(1 for e in errors if e > threshold) / trials
    gate = 4.0 * gamma + 3.0 * math.sqrt(4.0 * gamma / trials)
    return BooleanExperimentResult(
        errors=tuple(errors),
        fail_fraction=fail_fraction,
        gate=gate,
        error_threshold=threshold,
        median_error=float(np.median(errors)),
        trials=trials,
        passed=fail_fraction <= gate,
    )
