"""Monte Carlo verification harness for the bounds.

A LearningInstance is a finite hypothesis grid (atom j sits at t = j/m)
with a bounded loss, a prior, and a posterior rule (data-independent or
Gibbs).  The harness draws i.i.d. samples, evaluates every bound on the
realized (sample, posterior) pair, and PASSes a bound when the one-sided
99% Wilson upper confidence bound on its failure frequency stays within
the theoretical budget.  Trials draw from generators seeded by
(master_seed, trial_index), so runs are reproducible and trials are
independent of execution order.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import ndtri

from .betting import kt_log_wealth
from .bounds import (
    BOUND_NAMES,
    BoundConfig,
    BoundReport,
    complexity_term,
    empirical_bernstein_bound,
    expected_sample_variance,
    hoeffding_zcp_bound,
    little_kl_mean_bound,
    mcallester_baseline,
)
from .distributions import (
    DiscreteDistribution,
    from_log_weights,
    gaussian_instance,
    make_discrete,
    multivariate_instance,
)
from .divergences import (
    DivergenceKind,
    QuadratureConfig,
    divergence_gaussian,
    kl_discrete,
    renyi_discrete,
    tv_discrete,
    zcp_discrete,
)
from .errors import ValidationError

__all__ = [
    "LossKind",
    "FixedPosterior",
    "GibbsPosterior",
    "LearningInstance",
    "learning_instance_from_dict",
    "CoverageReport",
    "coverage_reports",
    "run_coverage",
    "wilson_upper",
    "ScalingRow",
    "ScalingTable",
    "divergence_scaling_table",
    "GaussianCheckRow",
    "gaussian_instance_check",
    "VilleRow",
    "ville_experiment",
    "TightnessRow",
    "tightness_comparison",
]

_MAX_ATOMS = 10_000

logger = logging.getLogger(__name__)


class LossKind(enum.Enum):
    ABS_DISTANCE = "abs"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class FixedPosterior:
    """Data-independent posterior: always return the given distribution."""

    distribution: DiscreteDistribution


@dataclass(frozen=True)
class GibbsPosterior:
    """Posterior proportional to prior * exp(-eta * n * empirical_mean)."""

    eta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.eta) or self.eta < 0.0:
            raise ValidationError("eta must be finite and >= 0")


@dataclass(frozen=True)
class LearningInstance:
    """Finite-grid learning problem with losses in [0, 1].

    ABS_DISTANCE: one shared uniform sample X_i in [0, 1], loss
    |j/m - X_i| with exact true mean (j/m)^2 - j/m + 1/2.  BERNOULLI: atom
    j observes its own Bernoulli(bernoulli_means[j]) coordinate of the
    sample vector, the loss being the observed bit.
    """

    theta_count: int
    prior: DiscreteDistribution
    loss_kind: LossKind
    posterior_rule: FixedPosterior | GibbsPosterior
    bernoulli_means: np.ndarray | None = None

    def __post_init__(self) -> None:
        m = self.theta_count
        if int(m) != m or not (1 <= m <= _MAX_ATOMS):
            raise ValidationError(f"theta_count must be an integer in [1, {_MAX_ATOMS}]")
        if self.prior.support_size != m:
            raise ValidationError("prior support must equal theta_count")
        if isinstance(self.posterior_rule, FixedPosterior):
            if self.posterior_rule.distribution.support_size != m:
                raise ValidationError("fixed posterior support must equal theta_count")
        elif not isinstance(self.posterior_rule, GibbsPosterior):
            raise ValidationError("posterior_rule must be FixedPosterior or GibbsPosterior")
        if self.loss_kind is LossKind.BERNOULLI:
            means = self.bernoulli_means
            if means is None:
                means = np.linspace(0.1, 0.9, m)
            means = np.asarray(means, dtype=float).copy()
            if means.shape != (m,) or np.isnan(means).any() or (means < 0).any() or (means > 1).any():
                raise ValidationError("bernoulli_means must be m values in [0, 1]")
            means.setflags(write=False)
            object.__setattr__(self, "bernoulli_means", means)
        elif self.bernoulli_means is not None:
            raise ValidationError("bernoulli_means only applies to BERNOULLI losses")

    @property
    def atom_positions(self) -> np.ndarray:
        return np.arange(self.theta_count) / self.theta_count

    def true_means(self) -> np.ndarray:
        """Exact per-atom expected loss."""
        if self.loss_kind is LossKind.ABS_DISTANCE:
            t = self.atom_positions
            return t * t - t + 0.5
        return self.bernoulli_means

    def draw_losses(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """(n, m) loss matrix for one i.i.d. sample of size n."""
        if int(n) != n or n < 1:
            raise ValidationError("n must be a positive integer")
        if self.loss_kind is LossKind.ABS_DISTANCE:
            x = rng.random(n)
            return np.abs(self.atom_positions[None, :] - x[:, None])
        return (rng.random((n, self.theta_count)) < self.bernoulli_means[None, :]).astype(float)

    def posterior(self, empirical_means: np.ndarray, n: int) -> DiscreteDistribution:
        """Posterior for one realized sample (empirical means, sample size)."""
        if isinstance(self.posterior_rule, FixedPosterior):
            return self.posterior_rule.distribution
        if self.posterior_rule.eta == 0.0:
            return self.prior
        mu_hat = np.asarray(empirical_means, dtype=float)
        if mu_hat.shape != (self.theta_count,):
            raise ValidationError("empirical_means must have one entry per atom")
        return from_log_weights(self.prior.log_weights - self.posterior_rule.eta * n * mu_hat)


def learning_instance_from_dict(payload: dict) -> LearningInstance:
    """Build a LearningInstance from its JSON-config form.

    Keys: m (int), loss ("abs" | "bernoulli"), posterior ("gibbs" |
    "fixed"), eta (gibbs), prior / fixed_weights (optional weight lists,
    uniform by default), bernoulli_means (optional).
    """
    if not isinstance(payload, dict):
        raise ValidationError("instance config must be a JSON object")
    try:
        m = int(payload["m"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("instance config requires an integer 'm'") from None
    loss_name = payload.get("loss", "abs")
    try:
        loss = LossKind(loss_name)
    except ValueError:
        raise ValidationError(f"unknown loss kind {loss_name!r}") from None
    prior = make_discrete(payload["prior"]) if "prior" in payload else make_discrete(np.ones(m))
    rule_name = payload.get("posterior", "gibbs")
    if rule_name == "gibbs":
        rule: FixedPosterior | GibbsPosterior = GibbsPosterior(float(payload.get("eta", 1.0)))
    elif rule_name == "fixed":
        weights = payload.get("fixed_weights")
        rule = FixedPosterior(make_discrete(weights) if weights is not None else prior)
    else:
        raise ValidationError(f"unknown posterior rule {rule_name!r}")
    means = payload.get("bernoulli_means")
    return LearningInstance(
        theta_count=m,
        prior=prior,
        loss_kind=loss,
        posterior_rule=rule,
        bernoulli_means=None if means is None else np.asarray(means, dtype=float),
    )


# ---------------------------------------------------------------------------
# Coverage Monte Carlo
# ---------------------------------------------------------------------------


def wilson_upper(failures: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Wilson score upper bound on a binomial proportion."""
    if trials < 1 or failures < 0 or failures > trials:
        raise ValidationError("need 0 <= failures <= trials with trials >= 1")
    if not (0.5 <= confidence < 1.0):
        raise ValidationError("confidence must lie in [0.5, 1)")
    z = float(ndtri(confidence))
    p_hat = failures / trials
    z2n = z * z / trials
    center = p_hat + 0.5 * z2n
    radius = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + 0.25 * z2n / trials)
    return min(1.0, (center + radius) / (1.0 + z2n))


def _trial_report(
    instance: LearningInstance, config: BoundConfig, rng: np.random.Generator
) -> BoundReport:
    n = config.n
    losses = instance.draw_losses(n, rng)
    mu_hat = losses.mean(axis=0)
    posterior = instance.posterior(mu_hat, n)
    true_mu = instance.true_means()
    w = posterior.weights

    gap = float(w @ (mu_hat - true_mu))
    v_hat = expected_sample_variance(losses, posterior)
    p_hat_mean = float(w @ mu_hat)
    p_mean = float(w @ true_mu)

    prior = instance.prior
    d_kl = kl_discrete(posterior, prior)
    d_tv = tv_discrete(posterior, prior)
    d_alpha = renyi_discrete(posterior, prior, config.alpha)
    d_zcp1 = zcp_discrete(posterior, prior, config.thm1_c)
    d_zcp2 = zcp_discrete(posterior, prior, config.thm2_c)
    comp = complexity_term(d_alpha, d_zcp2, config)

    return BoundReport(
        d_kl=d_kl,
        d_tv=d_tv,
        d_alpha=d_alpha,
        d_zcp_thm1=d_zcp1,
        d_zcp_thm2=d_zcp2,
        comp_n=comp,
        hoeffding_zcp=hoeffding_zcp_bound(d_zcp1, config),
        mcallester=mcallester_baseline(d_kl, config),
        emp_bernstein=empirical_bernstein_bound(comp, v_hat, n),
        little_kl_bound=little_kl_mean_bound(p_hat_mean, comp, n),
        realized_gap=gap,
        v_hat=v_hat,
        p_hat_mean=p_hat_mean,
        p_mean=p_mean,
    )


def coverage_reports(
    instance: LearningInstance, config: BoundConfig, trials: int, seed: int
) -> Iterator[BoundReport]:
    """Yield one BoundReport per trial, in trial-index order.

    Trial t draws from default_rng((seed, t)), so any subset of trials can
    be reproduced independently.
    """
    if int(trials) != trials or trials < 1:
        raise ValidationError("trials must be a positive integer")
    for trial in range(int(trials)):
        yield _trial_report(instance, config, np.random.default_rng((seed, trial)))


@dataclass(frozen=True)
class CoverageReport:
    """Failure counts per bound plus the Wilson-upper PASS verdicts.

    ``failure_events`` retains every (trial index, bound name, full
    BoundReport) triple for post-mortem inspection; counting is exact.
    """

    trials: int
    delta_budget: float
    failures_per_bound: dict[str, int]
    empirical_failure_rate: dict[str, float]
    wilson_upper_99: dict[str, float]
    failure_events: tuple[tuple[int, str, BoundReport], ...]

    def passed(self, bound: str) -> bool:
        return self.wilson_upper_99[bound] <= self.delta_budget

    @property
    def all_passed(self) -> bool:
        return all(self.passed(name) for name in self.failures_per_bound)


def run_coverage(
    instance: LearningInstance, config: BoundConfig, trials: int, seed: int
) -> CoverageReport:
    """Monte Carlo coverage check of every bound on one instance.

    PASS criterion per bound: the one-sided 99% Wilson upper bound on the
    failure rate is at most 2*delta (both theorems spend at most 2*delta
    of failure probability).
    """
    if int(trials) != trials or trials < 100:
        raise ValidationError("trials must be an integer >= 100")
    counts = dict.fromkeys(BOUND_NAMES, 0)
    events = []
    for trial, report in enumerate(coverage_reports(instance, config, trials, seed)):
        for name, failed in report.failures().items():
            if failed:
                counts[name] += 1
                events.append((trial, name, report))
                logger.warning("coverage failure: bound=%s trial=%d report=%r", name, trial, report)
    return CoverageReport(
        trials=int(trials),
        delta_budget=2.0 * config.delta,
        failures_per_bound=counts,
        empirical_failure_rate={k: v / trials for k, v in counts.items()},
        wilson_upper_99={k: wilson_upper(v, int(trials)) for k, v in counts.items()},
        failure_events=tuple(events),
    )


# ---------------------------------------------------------------------------
# Divergence scaling on the two-block instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    d: int
    kl: float
    tv: float
    zcp1: float
    kl_ratio: float
    tv_ratio: float
    zcp1_ratio: float


@dataclass(frozen=True)
class ScalingTable:
    """Divergences along a dimension sweep plus fitted log-log slopes.

    ``slopes`` are ordinary least squares fits of ln(value) against ln(d)
    over the top half of the grid, to be compared against the expected
    exponents (u/2, -u, -u/4).
    """

    u: float
    rows: tuple[ScalingRow, ...]
    slopes: dict[str, float]
    expected_slopes: dict[str, float]

    def max_slope_error(self) -> float:
        return max(abs(self.slopes[k] - self.expected_slopes[k]) for k in self.slopes)


def divergence_scaling_table(
    u: float, d_values, *, ln_a_override: float | None = None
) -> ScalingTable:
    """Exact KL / TV / ZCP(1) for the two-block instance along d_values."""
    ds = [int(d) for d in d_values]
    if len(ds) < 2 or any(d < 4 or d % 2 for d in ds) or any(b <= a for a, b in zip(ds, ds[1:])):
        raise ValidationError("d_values must be >= 4, even, strictly increasing, length >= 2")
    if not math.isfinite(u) or u <= 0.0:
        raise ValidationError("u must be finite and > 0")
    rows = []
    for d in ds:
        p, q = multivariate_instance(d, u, ln_a_override=ln_a_override)
        kl = kl_discrete(p, q)
        tv = tv_discrete(p, q)
        zcp1 = zcp_discrete(p, q, 1.0)
        rows.append(
            ScalingRow(
                d=d,
                kl=kl,
                tv=tv,
                zcp1=zcp1,
                kl_ratio=kl / d ** (0.5 * u),
                tv_ratio=tv / d ** (-u),
                zcp1_ratio=zcp1 / d ** (-0.25 * u),
            )
        )
    top = rows[len(rows) // 2 :]
    log_d = np.log([r.d for r in top])
    slopes = {}
    for name in ("kl", "tv", "zcp1"):
        values = np.array([getattr(r, name) for r in top])
        if (values <= 0).any():
            slopes[name] = math.nan
        else:
            slopes[name] = float(np.polyfit(log_d, np.log(values), 1)[0])
    expected = {"kl": 0.5 * u, "tv": -u, "zcp1": -0.25 * u}
    return ScalingTable(u=u, rows=tuple(rows), slopes=slopes, expected_slopes=expected)


# ---------------------------------------------------------------------------
# Gaussian mixture inequality checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianCheckRow:
    p: float
    exponent: float
    kl: float
    tv: float
    kl_floor: float
    kl_ok: bool
    product: float
    product_ok: bool


def gaussian_instance_check(
    p_values, exponent: float, config: QuadratureConfig | None = None
) -> list[GaussianCheckRow]:
    """Quadrature check of the mixture-pair KL floors and product caps.

    exponent 1: KL >= 1/(2p) - 1.3 and TV*KL <= 1/2.
    exponent 0.75: KL >= 1/(2 sqrt(p)) - 1.22 and KL*sqrt(TV) <= 1/2.
    """
    if exponent not in (1.0, 0.75):
        raise ValidationError("exponent must be 1 or 0.75")
    ps = [float(p) for p in p_values]
    if not ps or any(not (0.005 < p < 0.5) for p in ps):
        raise ValidationError("p values must lie in (0.005, 0.5)")
    config = config or QuadratureConfig()
    rows = []
    for p in ps:
        pair = gaussian_instance(p, 1.0, exponent)
        kl = divergence_gaussian(pair, DivergenceKind.KL, config).value
        tv = divergence_gaussian(pair, DivergenceKind.TV, config).value
        if exponent == 1.0:
            kl_floor = 0.5 / p - 1.3
            product = tv * kl
        else:
            kl_floor = 0.5 / math.sqrt(p) - 1.22
            product = kl * math.sqrt(tv)
        rows.append(
            GaussianCheckRow(
                p=p,
                exponent=exponent,
                kl=kl,
                tv=tv,
                kl_floor=kl_floor,
                kl_ok=kl >= kl_floor,
                product=product,
                product_ok=product <= 0.5,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Ville crossing experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VilleRow:
    delta: float
    crossings: int
    paths: int
    rate: float
    wilson_upper_99: float
    passed: bool


def ville_experiment(n: int, delta_values, paths: int, seed: int) -> list[VilleRow]:
    """Crossing frequency of KT wealth over mean-zero coins vs 1/delta.

    Coins are Rademacher sign times Uniform[0, 1] magnitude, so the KT
    wealth is a nonnegative martingale started at 1 and Ville's inequality
    caps P(max_t W_t >= 1/delta) at delta.  PASS per delta: Wilson-99
    upper bound on the crossing rate <= delta.
    """
    if int(n) != n or n < 1:
        raise ValidationError("n must be a positive integer")
    if int(paths) != paths or paths < 1000:
        raise ValidationError("paths must be an integer >= 1000")
    deltas = [float(d) for d in delta_values]
    if not deltas or any(math.isnan(d) or not (0.0 < d < 1.0) for d in deltas):
        raise ValidationError("delta values must lie in (0, 1)")
    thresholds = np.array([-math.log(d) for d in deltas])
    crossings = np.zeros(len(deltas), dtype=int)
    for path in range(int(paths)):
        rng = np.random.default_rng((seed, path))
        signs = rng.integers(0, 2, int(n)) * 2 - 1
        coins = signs * rng.random(int(n))
        peak = float(kt_log_wealth(coins)[1:].max())
        crossings += peak >= thresholds
    rows = []
    for delta, crossed in zip(deltas, crossings):
        upper = wilson_upper(int(crossed), int(paths))
        rows.append(
            VilleRow(
                delta=delta,
                crossings=int(crossed),
                paths=int(paths),
                rate=crossed / paths,
                wilson_upper_99=upper,
                passed=upper <= delta,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Bound tightness comparison on the two-block instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TightnessRow:
    d: int
    hoeffding_zcp: float
    mcallester: float
    ratio: float


def tightness_comparison(
    u: float, d_values, config: BoundConfig, *, ln_a_override: float | None = None
) -> list[TightnessRow]:
    """Hoeffding-ZCP vs McAllester when the posterior/prior pair is the
    two-block instance: the ratio decays as d grows because ZCP scales like
    d**(-u/4) while KL grows like d**(u/2).  With ln_a_override=0 the pair
    is identical and the rows isolate the bounds' additive constants."""
    ds = [int(d) for d in d_values]
    if not ds or any(d < 2 or d % 2 for d in ds):
        raise ValidationError("d_values must be even integers >= 2")
    rows = []
    for d in ds:
        p, q = multivariate_instance(d, u, ln_a_override=ln_a_override)
        zcp = zcp_discrete(p, q, config.thm1_c)
        kl = kl_discrete(p, q)
        h = hoeffding_zcp_bound(zcp, config)
        m = mcallester_baseline(kl, config)
        rows.append(TightnessRow(d=d, hoeffding_zcp=h, mcallester=m, ratio=h / m))
    return rows
