"""High-probability generalization bounds built on the ZCP divergence.

Two families: a Hoeffding-type bound on the posterior-averaged empirical
gap, driven by ZCP at scale sqrt(2n)/delta, and a log-wealth complexity
term Comp_n (ZCP at scale sqrt(2) n^2.5 / delta times a Renyi log factor)
that converts into empirical-Bernstein and binary-kl bounds.  Vacuous
bounds are reported as exactly 1 since all losses live in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np
from scipy.special import lambertw

from .distributions import DiscreteDistribution
from .divergences import (
    kl_discrete,
    little_kl_inverse_upper,
    renyi_discrete,
    tv_discrete,
    zcp_discrete,
)
from .errors import ValidationError

__all__ = [
    "BoundConfig",
    "BoundReport",
    "BOUND_NAMES",
    "hoeffding_zcp_bound",
    "mcallester_baseline",
    "complexity_term",
    "empirical_bernstein_bound",
    "expected_sample_variance",
    "little_kl_mean_bound",
    "AsymptoticsCheck",
    "asymptotics_inequality_check",
    "fenchel_dual_bound",
    "InequalityResult",
    "InequalityReport",
    "analytic_inequality_suite",
]

BOUND_NAMES = ("hoeffding_zcp", "mcallester", "emp_bernstein", "little_kl")


@dataclass(frozen=True)
class BoundConfig:
    """Sample size, failure budget and Renyi order shared by the bounds."""

    n: int
    delta: float
    alpha: float = 2.0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if math.isnan(self.delta) or not (0.0 < self.delta < 1.0):
            raise ValidationError("delta must lie in (0, 1)")
        if math.isnan(self.alpha) or self.alpha <= 1.0:
            raise ValidationError("alpha must be > 1")

    @property
    def thm1_c(self) -> float:
        """ZCP scale sqrt(2n)/delta used by the Hoeffding-type bound."""
        return math.sqrt(2.0 * self.n) / self.delta

    @property
    def thm2_c(self) -> float:
        """ZCP scale sqrt(2) n^2.5 / delta used by the complexity term."""
        return math.sqrt(2.0) * float(self.n) ** 2.5 / self.delta


def _check_nonneg(name: str, value: float) -> float:
    if math.isnan(value) or value < 0.0:
        raise ValidationError(f"{name} must be >= 0")
    return float(value)


def hoeffding_zcp_bound(d_zcp: float, config: BoundConfig) -> float:
    """Gap bound (sqrt(2) ZCP + 2 + sqrt(ln(2 sqrt(n)/delta))) / sqrt(n).

    Holds for the posterior-averaged empirical-minus-true gap with
    probability at least 1 - 2 delta when d_zcp is the posterior/prior
    ZCP divergence at scale sqrt(2n)/delta.  Capped at the vacuous 1.
    """
    d_zcp = _check_nonneg("d_zcp", d_zcp)
    n, delta = config.n, config.delta
    raw = (
        math.sqrt(2.0) * d_zcp + 2.0 + math.sqrt(math.log(2.0 * math.sqrt(n) / delta))
    ) / math.sqrt(n)
    return min(raw, 1.0)


def mcallester_baseline(d_kl: float, config: BoundConfig) -> float:
    """Classical baseline sqrt((KL + ln(2 sqrt(n)/delta)) / (2n)), capped at 1."""
    d_kl = _check_nonneg("d_kl", d_kl)
    n, delta = config.n, config.delta
    raw = math.sqrt((d_kl + math.log(2.0 * math.sqrt(n) / delta)) / (2.0 * n))
    return min(raw, 1.0)


def complexity_term(d_alpha: float, d_zcp: float, config: BoundConfig) -> float:
    """Comp_n: log-wealth budget combining Renyi and ZCP divergences.

    (1/sqrt(2)) sqrt(ln(4 n^2/delta) + alpha/(alpha-1) ln n + D_alpha) *
    ZCP(.; sqrt(2) n^2.5/delta) + ln(2 e^2 sqrt(n) (1 + 4 n^2/delta)) +
    delta/(n(n+1)).  Requires n >= 2.
    """
    d_alpha = _check_nonneg("d_alpha", d_alpha)
    d_zcp = _check_nonneg("d_zcp", d_zcp)
    n, delta, alpha = config.n, config.delta, config.alpha
    if n < 2:
        raise ValidationError("complexity_term requires n >= 2")
    if d_zcp == 0.0:
        main = 0.0
    else:
        log_sum = math.log(4.0 * n * n / delta) + alpha / (alpha - 1.0) * math.log(n) + d_alpha
        main = math.sqrt(0.5) * math.sqrt(log_sum) * d_zcp
    constant = math.log(2.0 * math.e**2 * math.sqrt(n) * (1.0 + 4.0 * n * n / delta))
    return main + constant + delta / (n * (n + 1.0))


def empirical_bernstein_bound(comp: float, v_hat: float, n: int) -> float:
    """Variance-sensitive gap bound from the complexity term.

    sqrt(2 Comp V) / (sqrt(n) - 2 Comp/sqrt(n)) + 2 Comp / (n - 2 Comp),
    reported as the vacuous 1 whenever n <= 2 Comp.
    """
    comp = _check_nonneg("comp", comp)
    v_hat = _check_nonneg("v_hat", v_hat)
    if int(n) != n or n < 2:
        raise ValidationError("n must be an integer >= 2")
    slack = n - 2.0 * comp
    if slack <= 0.0:
        return 1.0
    root_n = math.sqrt(n)
    value = math.sqrt(2.0 * comp * v_hat) / (slack / root_n) + 2.0 * comp / slack
    return min(value, 1.0)


def expected_sample_variance(losses: np.ndarray, posterior: DiscreteDistribution) -> float:
    """Posterior average of the per-atom unbiased sample variance.

    Equals (1/(n(n-1))) sum_{i<j} E_posterior[(f(theta, X_i) -
    f(theta, X_j))^2], computed via n*sum(a^2) - (sum a)^2 rather than the
    quadratic double sum.
    """
    arr = np.asarray(losses, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("losses must be an (n, m) matrix")
    n, m = arr.shape
    if n < 2:
        raise ValidationError("need at least two samples")
    if m != posterior.support_size:
        raise ValidationError("losses column count must match the posterior support")
    if np.isnan(arr).any() or (arr < 0.0).any() or (arr > 1.0).any():
        raise ValidationError("losses must lie in [0, 1]")
    s1 = arr.sum(axis=0)
    s2 = (arr * arr).sum(axis=0)
    per_atom = np.maximum(n * s2 - s1 * s1, 0.0) / (n * (n - 1.0))
    return float(posterior.weights @ per_atom)


def little_kl_mean_bound(p_hat_mean: float, comp: float, n: int) -> float:
    """Upper bound on the posterior-averaged true mean via kl inversion.

    Inverts kl(p_hat_mean, .) <= Comp_n / n upward; exactly 1 when the
    budget is infinite or the inversion saturates.
    """
    if math.isnan(p_hat_mean) or not (0.0 <= p_hat_mean <= 1.0):
        raise ValidationError("p_hat_mean must lie in [0, 1]")
    comp = _check_nonneg("comp", comp)
    if int(n) != n or n < 2:
        raise ValidationError("n must be an integer >= 2")
    return little_kl_inverse_upper(p_hat_mean, comp / n)


@dataclass(frozen=True)
class BoundReport:
    """Every divergence and bound evaluated for one (sample, posterior) pair."""

    d_kl: float
    d_tv: float
    d_alpha: float
    d_zcp_thm1: float
    d_zcp_thm2: float
    comp_n: float
    hoeffding_zcp: float
    mcallester: float
    emp_bernstein: float
    little_kl_bound: float
    realized_gap: float
    v_hat: float
    p_hat_mean: float
    p_mean: float

    def failures(self) -> dict[str, bool]:
        """Which bounds the realized quantities violate."""
        return {
            "hoeffding_zcp": self.realized_gap > self.hoeffding_zcp,
            "mcallester": self.realized_gap > self.mcallester,
            "emp_bernstein": abs(self.realized_gap) > self.emp_bernstein,
            "little_kl": self.p_mean > self.little_kl_bound,
        }

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# Asymptotic-regime surrogate
# ---------------------------------------------------------------------------


class AsymptoticsCheck(NamedTuple):
    b_over_l: float
    a_value: float
    holds: bool


def asymptotics_inequality_check(
    p: DiscreteDistribution, p0: DiscreteDistribution, n: int
) -> AsymptoticsCheck:
    """Check B_n / L(n) <= A_n for the log-wealth bound at delta = 1/n^2.

    B_n is the complexity term at delta = 1/n^2 and alpha_n = 1 + 1/ln(n);
    L(n) = sqrt(2 ln(n) ln(en) ln(2 + 2 sqrt(2) n^4.5)) is its dominating
    log factor; A_n = 2 + (2 + sqrt(D_alpha_n)) (ZCP(.;1) + TV).  Holds
    deterministically for every pair once n >= 25; vacuously true (inf vs
    inf) when P is not dominated by P0.
    """
    if int(n) != n or n < 25:
        raise ValidationError("n must be an integer >= 25")
    n = int(n)
    zcp1 = zcp_discrete(p, p0, 1.0)
    if math.isinf(zcp1):
        return AsymptoticsCheck(math.inf, math.inf, True)
    tv = tv_discrete(p, p0)
    log_n = math.log(n)
    alpha_n = 1.0 + 1.0 / log_n
    d_alpha = renyi_discrete(p, p0, alpha_n)
    c_big = math.sqrt(2.0) * float(n) ** 4.5
    zcp_big = zcp_discrete(p, p0, c_big)

    log_sum = math.log(4.0) + 4.0 * log_n + log_n * (log_n + 1.0) + d_alpha
    b_n = (
        math.sqrt(0.5) * math.sqrt(log_sum) * zcp_big
        + math.log(2.0 * math.e**2 * math.sqrt(n) * (1.0 + 4.0 * float(n) ** 4))
        + 1.0 / (float(n) ** 3 * (n + 1.0))
    )
    l_n = math.sqrt(2.0 * log_n * (log_n + 1.0) * math.log(2.0 + 2.0 * math.sqrt(2.0) * float(n) ** 4.5))
    a_n = 2.0 + (2.0 + math.sqrt(d_alpha)) * (zcp1 + tv)
    ratio = b_n / l_n
    return AsymptoticsCheck(ratio, a_n, ratio <= a_n)


# ---------------------------------------------------------------------------
# Analytic lemmas and their fuzz suite
# ---------------------------------------------------------------------------


def fenchel_dual_bound(a: float, b: float, y: float) -> float:
    """Upper bound |y| sqrt(a ln(1 + a y^2/b^2)) - b on the conjugate of
    F*(x) = b exp(x^2 / (2a))."""
    for name, v in (("a", a), ("b", b)):
        if not math.isfinite(v) or v <= 0.0:
            raise ValidationError(f"{name} must be finite and > 0")
    if not math.isfinite(y):
        raise ValidationError("y must be finite")
    t = a * y * y / (b * b)
    return abs(y) * math.sqrt(a * math.log1p(t)) - b


def _gaussian_potential_conjugate(a, b, y):
    """Exact sup_x (x y - b exp(x^2/(2a))) via the Lambert W stationary point."""
    u = np.real(lambertw(np.asarray(a) * np.square(y) / np.square(b)))
    return np.abs(y) * np.sqrt(np.asarray(a) * u) - np.asarray(b) * np.exp(0.5 * u)


def _max_linear_log_barrier(a, b):
    """Exact max over beta in [-1, 1] of a beta + b (ln(1 - |beta|) + |beta|)."""
    mag = np.abs(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        interior = mag + b * np.log(b / (mag + b))
    return np.where(b > 0.0, np.where(mag + b > 0.0, interior, 0.0), mag)


@dataclass(frozen=True)
class InequalityResult:
    worst_slack: float
    violations: int


@dataclass(frozen=True)
class InequalityReport:
    """Fuzz results for the three analytic lemmas behind the bounds."""

    trials: int
    tolerance: float
    results: dict[str, InequalityResult]

    @property
    def ok(self) -> bool:
        return all(r.violations == 0 for r in self.results.values())


def analytic_inequality_suite(
    trials: int = 100_000, seed: int = 0, tolerance: float = 1e-9
) -> InequalityReport:
    """Fuzz the three analytic lemmas the bound proofs lean on.

    1. ln(1 + beta x) >= beta x + (ln(1 - |beta|) + |beta|) x^2 on
       |x| <= 1, |beta| < 1.
    2. max_beta a beta + b (ln(1 - |beta|) + |beta|) >= a^2 / ((4/3)|a| + 2b).
    3. The Fenchel conjugate of b exp(x^2/(2a)) is at most
       |y| sqrt(a ln(1 + a y^2 / b^2)) - b.

    Slack is bound minus quantity it must dominate (nonnegative when the
    lemma holds); a violation is slack < -tolerance.
    """
    if int(trials) != trials or trials < 1:
        raise ValidationError("trials must be a positive integer")
    _check_nonneg("tolerance", tolerance)
    rng = np.random.default_rng(seed)

    beta = rng.uniform(-1.0, 1.0, trials)
    x = rng.uniform(-1.0, 1.0, trials)
    fan_slack = np.log1p(beta * x) - (beta * x + (np.log1p(-np.abs(beta)) + np.abs(beta)) * x * x)

    a = rng.normal(0.0, 5.0, trials)
    b = rng.uniform(0.0, 10.0, trials)
    a[:: max(trials // 100, 1)] = 0.0
    b[1 :: max(trials // 100, 1)] = 0.0
    denom = (4.0 / 3.0) * np.abs(a) + 2.0 * b
    rhs = np.where(denom > 0.0, a * a / np.where(denom > 0.0, denom, 1.0), 0.0)
    barrier_slack = _max_linear_log_barrier(a, b) - rhs

    fa = rng.uniform(0.1, 5.0, trials)
    fb = rng.uniform(0.1, 5.0, trials)
    fy = rng.uniform(-10.0, 10.0, trials)
    fy[:: max(trials // 100, 1)] = 0.0
    dual = np.abs(fy) * np.sqrt(fa * np.log1p(fa * fy * fy / (fb * fb))) - fb
    fenchel_slack = dual - _gaussian_potential_conjugate(fa, fb, fy)

    results = {}
    for name, slack in (
        ("fan_log_quadratic", fan_slack),
        ("max_linear_log_barrier", barrier_slack),
        ("fenchel_dual", fenchel_slack),
    ):
        results[name] = InequalityResult(
            worst_slack=float(slack.min()),
            violations=int((slack < -tolerance).sum()),
        )
    return InequalityReport(trials=int(trials), tolerance=tolerance, results=results)
