"""Distribution families consumed by the divergence and bound machinery.

Finite-support distributions carry exact log-weights next to the weight
vector: the adversarial two-block constructions put mass like exp(-d**1.5)
on half of their atoms, which underflows float64 weights long before the
divergences built from the log-ratios become meaningless.  The Gaussian
mixture pair is the continuous wide-plus-narrow family whose KL stays large
while total variation shrinks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "DiscreteDistribution",
    "GaussianMixturePair",
    "make_discrete",
    "from_log_weights",
    "bernoulli_instance",
    "multivariate_instance",
    "gaussian_instance",
    "density_ratio_log",
    "to_json",
    "from_json",
]

_SUM_TOL = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector over a finite support.

    ``log_weights`` is the authoritative representation; ``weights`` is
    ``exp(log_weights)`` and may underflow to 0.0 for extreme atoms while
    the log-weights stay exact.  Atoms with zero mass carry ``-inf``.
    Instances are immutable and safe to share across threads.
    """

    weights: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self) -> None:
        w = _frozen_array(self.weights)
        lw = _frozen_array(self.log_weights)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError("weights must be a nonempty 1-d vector")
        if lw.shape != w.shape:
            raise ValidationError("log_weights must match weights in shape")
        if np.isnan(w).any() or np.isinf(w).any() or (w < 0).any():
            raise ValidationError("weights must be finite and nonnegative")
        if np.isnan(lw).any() or (lw == np.inf).any():
            raise ValidationError("log_weights must be < +inf and not NaN")
        if abs(float(w.sum()) - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 within {_SUM_TOL}, got {float(w.sum())!r}"
            )
        if np.max(np.abs(w - np.exp(lw))) > _SUM_TOL:
            raise ValidationError("weights must equal exp(log_weights) atom by atom")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "log_weights", lw)

    @property
    def support_size(self) -> int:
        return int(self.weights.size)


def make_discrete(weights) -> DiscreteDistribution:
    """Normalize a nonnegative weight vector into a DiscreteDistribution."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise ValidationError("weights must be a nonempty 1-d vector")
    if np.isnan(w).any() or np.isinf(w).any() or (w < 0).any():
        raise ValidationError("weights must be finite and nonnegative")
    total = float(w.sum())
    if total <= 0.0:
        raise ValidationError("weights must have positive total mass")
    w = w / total
    with np.errstate(divide="ignore"):
        lw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), -np.inf)
    return DiscreteDistribution(w, lw)


def from_log_weights(log_weights) -> DiscreteDistribution:
    """Build a DiscreteDistribution from unnormalized log-weights.

    Normalization happens in log-space, so inputs may span thousands of
    orders of magnitude; ``-inf`` entries denote zero-mass atoms.
    """
    lw = np.asarray(log_weights, dtype=float)
    if lw.ndim != 1 or lw.size < 1:
        raise ValidationError("log_weights must be a nonempty 1-d vector")
    if np.isnan(lw).any() or (lw == np.inf).any():
        raise ValidationError("log_weights must be < +inf and not NaN")
    finite = lw[lw > -np.inf]
    if finite.size == 0:
        raise ValidationError("log_weights must have at least one finite entry")
    shift = float(finite.max())
    log_total = shift + math.log(float(np.exp(lw - shift).sum()))
    lw = lw - log_total
    return DiscreteDistribution(np.exp(lw), lw)


# ---------------------------------------------------------------------------
# Adversarial finite instances
# ---------------------------------------------------------------------------


def bernoulli_instance(p: float, ln_a: float) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Two-point pair P = (p, 1-p) versus Q = (p/a, 1 - p/a), a given as ln(a).

    Total variation is exactly p*(1 - 1/a) while KL(P, Q) sits between
    p*ln(a) - 1/e and p*ln(a), so cranking ln(a) up separates the two at
    will.  ln(a) is taken (and stored) in log form because interesting
    settings like ln(a) = 1/p**2 make a itself unrepresentable.
    """
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise ValidationError("p must lie strictly inside (0, 1)")
    if not math.isfinite(ln_a) or ln_a < 0.0:
        raise ValidationError("ln_a must be finite and >= 0 (a >= 1)")
    dist_p = from_log_weights([math.log(p), math.log1p(-p)])
    lq0 = math.log(p) - ln_a
    lq1 = math.log1p(-math.exp(lq0))
    dist_q = DiscreteDistribution(np.array([math.exp(lq0), math.exp(lq1)]), np.array([lq0, lq1]))
    return dist_p, dist_q


def multivariate_instance(
    d: int, u: float, *, ln_a_override: float | None = None
) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Two-block pair on d atoms with p = d**(-1-u) and ln(a) = d**(1.5*u).

    The first d/2 atoms carry weight p under P and p/a under Q; the last
    d/2 atoms share the leftover mass uniformly.  As d grows, KL scales
    like d**(u/2), total variation like d**(-u), and the c=1 ZCP divergence
    like d**(-u/4).  ``ln_a_override`` forces a different ln(a) (0 gives
    P = Q) for testing.
    """
    if not isinstance(d, (int, np.integer)) or d < 2 or d % 2 != 0:
        raise ValidationError("d must be an even integer >= 2")
    if not math.isfinite(u) or u <= 0.0:
        raise ValidationError("u must be finite and > 0")
    ln_a = float(d) ** (1.5 * u) if ln_a_override is None else float(ln_a_override)
    if not math.isfinite(ln_a) or ln_a < 0.0:
        raise ValidationError("ln_a_override must be finite and >= 0")
    half = d // 2
    log_p = (-1.0 - u) * math.log(d)
    log_half_mass = math.log(half) + log_p  # ln(p * d/2) < 0
    if log_half_mass >= 0.0:
        raise ValidationError("first-block mass p*d/2 must be < 1")

    lp_first = log_p
    lp_last = math.log1p(-math.exp(log_half_mass)) - math.log(half)
    lq_first = log_p - ln_a
    lq_last = math.log1p(-math.exp(log_half_mass - ln_a)) - math.log(half)

    lw_p = np.concatenate([np.full(half, lp_first), np.full(half, lp_last)])
    lw_q = np.concatenate([np.full(half, lq_first), np.full(half, lq_last)])
    return (
        DiscreteDistribution(np.exp(lw_p), lw_p),
        DiscreteDistribution(np.exp(lw_q), lw_q),
    )


# ---------------------------------------------------------------------------
# Gaussian mixture pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianMixturePair:
    """P = p*N(mu, sigma1^2) + (1-p)*N(mu, sigma2^2) against Q = N(mu, sigma2^2).

    Immutable value object; densities are evaluated in log-space so the
    ratio dP/dQ stays usable even when it spans thousands of e-folds.
    """

    mu: float
    sigma1: float
    sigma2: float
    p: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma1", "sigma2", "p"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise ValidationError("sigma1 and sigma2 must be > 0")
        if not (0.0 <= self.p <= 1.0):
            raise ValidationError("p must lie in [0, 1]")

    def log_pdf_p(self, x: float) -> float:
        """Log-density of the mixture P at x."""
        l1 = _log_normal_pdf(x, self.mu, self.sigma1)
        l2 = _log_normal_pdf(x, self.mu, self.sigma2)
        if self.p == 0.0:
            return l2
        if self.p == 1.0:
            return l1
        return _logaddexp(math.log(self.p) + l1, math.log1p(-self.p) + l2)

    def log_pdf_q(self, x: float) -> float:
        """Log-density of the reference component Q at x."""
        return _log_normal_pdf(x, self.mu, self.sigma2)


def gaussian_instance(p: float, sigma1: float, exponent: float) -> GaussianMixturePair:
    """Mixture pair with sigma2 = sigma1 * p**exponent, exponent in {1, 0.75}.

    exponent 1 realizes TV*KL <= 1/2 with KL >= 1/(2p) - 1.3; exponent 0.75
    realizes KL*sqrt(TV) <= 1/2 with KL >= 1/(2 sqrt(p)) - 1.22.
    """
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise ValidationError("p must lie strictly inside (0, 1)")
    if not math.isfinite(sigma1) or sigma1 <= 0.0:
        raise ValidationError("sigma1 must be finite and > 0")
    if exponent not in (1.0, 0.75):
        raise ValidationError("exponent must be 1 or 0.75")
    return GaussianMixturePair(mu=0.0, sigma1=sigma1, sigma2=sigma1 * p**exponent, p=p)


def _log_normal_pdf(x: float, mu: float, sigma: float) -> float:
    z = (x - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - 0.5 * _LOG_2PI


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def density_ratio_log(pair: GaussianMixturePair, x: float) -> float:
    """ln(dP/dQ)(x) for a GaussianMixturePair, stable over the whole real line.

    Equals ln(p * phi1(x)/phi2(x) + 1 - p) assembled in log-space; in the far
    tail it grows like ln(p) + ln(sigma2/sigma1) + x^2 (1/(2 sigma2^2) -
    1/(2 sigma1^2)) without ever forming the overflowing raw ratio.
    """
    if not math.isfinite(x):
        raise ValidationError("x must be finite")
    if pair.p == 0.0:
        return 0.0
    log_component_ratio = (
        math.log(pair.sigma2 / pair.sigma1)
        + (x - pair.mu) ** 2 * 0.5 * (1.0 / pair.sigma2**2 - 1.0 / pair.sigma1**2)
    )
    if pair.p == 1.0:
        return log_component_ratio
    return _logaddexp(math.log(pair.p) + log_component_ratio, math.log1p(-pair.p))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_json(dist: DiscreteDistribution | GaussianMixturePair) -> str:
    """Serialize a distribution to its interchange JSON form."""
    if isinstance(dist, DiscreteDistribution):
        payload = {"type": "discrete", "weights": [float(w) for w in dist.weights]}
    elif isinstance(dist, GaussianMixturePair):
        payload = {
            "type": "gaussian_mixture",
            "mu": dist.mu,
            "sigma1": dist.sigma1,
            "sigma2": dist.sigma2,
            "p": dist.p,
        }
    else:
        raise ValidationError(f"unsupported distribution type: {type(dist).__name__}")
    return json.dumps(payload)


def from_json(text: str) -> DiscreteDistribution | GaussianMixturePair:
    """Inverse of :func:`to_json`; raises ValidationError on malformed input."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed distribution JSON: {exc}") from exc
    if not isinstance(payload, dict) or "type" not in payload:
        raise ValidationError("distribution JSON must be an object with a 'type' field")
    kind = payload["type"]
    if kind == "discrete":
        if "weights" not in payload:
            raise ValidationError("discrete distribution JSON requires 'weights'")
        return make_discrete(payload["weights"])
    if kind == "gaussian_mixture":
        try:
            return GaussianMixturePair(
                mu=float(payload["mu"]),
                sigma1=float(payload["sigma1"]),
                sigma2=float(payload["sigma2"]),
                p=float(payload["p"]),
            )
        except KeyError as exc:
            raise ValidationError(f"gaussian_mixture JSON missing field {exc}") from exc
    raise ValidationError(f"unknown distribution type {kind!r}")
