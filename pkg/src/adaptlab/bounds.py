"""Closed-form error and confidence bounds for learning-assisted decisions.

This module computes, in pure float64, every quantity needed to bound the
error a regression-based adaptation-space reduction can add to a verified
decision:

- VC dimension of a linear hypothesis class: ``input_dim + 1``.
- The expected-risk margin around the empirical risk of a learner trained
  on m i.i.d. samples:

      margin        = (b - a) * sqrt(nu)
      nu            = (d*(ln(2m/d) + 1) - ln(eta/4)) / m

  where [a, b] bounds the squared loss and eta is a designer-chosen
  slack in (0, 1); valid only for d < m.
- The correction of that margin for training targets that were *estimated*
  by a statistical model checker with quality-unit error kappa:

      adjusted_margin = margin + 2*(upper - lower)*kappa

- The probability that an option whose true quality is within the expected
  prediction error of the global best (a "feasible" option) survives a
  reduction with cutoff C:

      survival_prob = clamp((C - best_prediction) / (2*sqrt(risk_upper)), 0, 1)

  and the probability that at least one of n such options survives,
  ``1 - (1 - survival_prob)**n``.
- The composition of all of the above into a :class:`DecisionErrorBound`:
  the best option selected from the reduced, SMC-verified space is within

      sqrt(empirical_risk + adjusted_margin) + kappa

  of the true best, with probability at least

      (1 - eta) * (1 - alpha)**2 * (1 - (1 - survival_prob)**n).

Everything here is a pure function of its arguments; there is no shared
state and all operations are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Goal(Enum):
    """Direction of the quality objective. Only minimization is supported."""

    MINIMIZE = "minimize"


@dataclass(frozen=True)
class QualityDomain:
    """Range [lower, upper] of a quality value with a minimization goal.

    Induces the squared-loss bounds used by the risk margin: the loss lies
    in [0, (upper - lower)**2] and its derivative in the target is bounded
    by 2*(upper - lower). For a domain starting at 0 these reduce to
    upper**2 and 2*upper.
    """

    lower: float
    upper: float
    goal: Goal = Goal.MINIMIZE

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("quality domain bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"quality domain requires lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def loss_upper(self) -> float:
        """Maximum of the squared loss over the domain: (upper - lower)**2."""
        return self.width * self.width

    @property
    def loss_slope_bound(self) -> float:
        """Bound on |d loss / d target| over the domain: 2*(upper - lower)."""
        return 2.0 * self.width


@dataclass(frozen=True)
class LearnerCapacity:
    """Input dimension and VC dimension of the hypothesis class in use."""

    input_dim: int
    vc_dim: int

    @classmethod
    def linear(cls, input_dim: int) -> "LearnerCapacity":
        return cls(input_dim=input_dim, vc_dim=vc_dimension_linear(input_dim))


@dataclass(frozen=True)
class RiskBoundInputs:
    """Everything the decision-error bound needs about one trained model.

    m: training samples used for the fit (must exceed vc_dim).
    vc_dim: capacity of the learner's hypothesis class.
    eta: designer slack in (0, 1) trading bound width against confidence.
    empirical_risk: mean squared training error, in squared quality units.
    kappa: quality-unit half-width of the verifier's estimates.
    alpha: verifier significance level in (0, 1) (confidence 1 - alpha).
    """

    m: int
    vc_dim: int
    eta: float
    empirical_risk: float
    kappa: float
    alpha: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.vc_dim < 1:
            raise ValueError("vc_dim must be a positive integer")
        if self.vc_dim >= self.m:
            raise ValueError(f"d >= m: risk bound needs more samples ({self.m}) than VC dimension ({self.vc_dim})")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.empirical_risk < 0.0:
            raise ValueError("empirical_risk must be nonnegative")
        if self.kappa < 0.0:
            raise ValueError("kappa must be nonnegative")


@dataclass(frozen=True)
class DecisionErrorBound:
    """All quantities of the composed error/confidence bound for one decision.

    error_bound and min_probability are the headline pair: the selected
    option's true quality is within ``error_bound`` of the true best with
    probability at least ``min_probability``. The remaining fields are the
    intermediate terms, kept so the composition can be audited cell by cell.
    """

    confidence_term: float       # nu: capacity/sample ratio inside the margin
    risk_margin: float           # (b - a) * sqrt(nu), squared quality units
    adjusted_risk_margin: float  # risk_margin + slope_bound * kappa
    expected_risk_upper: float   # empirical_risk + adjusted_risk_margin
    survival_prob: float         # feasible option survives reduction, in [0, 1]
    n_feasible: int
    best_prediction: float       # minimum predicted quality over the whole space
    cutoff: float                # reduction threshold actually applied
    error_bound: float           # sqrt(expected_risk_upper) + kappa, quality units
    min_probability: float       # (1-eta)(1-alpha)^2(1-(1-survival_prob)^n)


def vc_dimension_linear(input_dim: int) -> int:
    """VC dimension of linear functions on input_dim real features."""
    if input_dim < 1:
        raise ValueError("input_dim must be a positive integer")
    return input_dim + 1


def vc_confidence_term(m: int, vc_dim: int, eta: float) -> float:
    """Capacity term nu = (d*(ln(2m/d) + 1) - ln(eta/4)) / m.

    Strictly positive, increasing in d (for d < m) and shrinking roughly
    like (d ln m)/m as the training set grows.
    """
    if m < 1 or vc_dim < 1:
        raise ValueError("m and vc_dim must be positive integers")
    if vc_dim >= m:
        raise ValueError(f"d >= m: risk bound needs more samples ({m}) than VC dimension ({vc_dim})")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    d = float(vc_dim)
    return (d * (math.log(2.0 * m / d) + 1.0) - math.log(eta / 4.0)) / m


def risk_margin(domain: QualityDomain, confidence_term: float) -> float:
    """Half-width (b - a) * sqrt(nu) of the expected-risk interval."""
    if confidence_term < 0.0:
        raise ValueError("confidence_term must be nonnegative")
    return domain.loss_upper * math.sqrt(confidence_term)


def adjusted_risk_margin(margin: float, domain: QualityDomain, kappa: float) -> float:
    """Margin corrected for verifier-estimated targets: margin + 2*width*kappa."""
    if margin < 0.0:
        raise ValueError("margin must be nonnegative")
    if kappa < 0.0:
        raise ValueError("kappa must be nonnegative")
    return margin + domain.loss_slope_bound * kappa


def reduction_survival_prob(cutoff: float, best_prediction: float, expected_risk_upper: float) -> float:
    """Probability a feasible option's prediction lands inside the reduced space.

    (cutoff - best_prediction) / (2*sqrt(expected_risk_upper)), clamped to
    [0, 1]: the raw ratio can exceed 1 for generous cutoffs and must remain
    a probability.
    """
    if expected_risk_upper <= 0.0:
        raise ValueError("expected_risk_upper must be positive (zero risk makes the ratio undefined)")
    ratio = (cutoff - best_prediction) / (2.0 * math.sqrt(expected_risk_upper))
    return min(1.0, max(0.0, ratio))


def prob_any_feasible_retained(survival_prob: float, n_feasible: int) -> float:
    """Probability at least one of n feasible options survives: 1 - (1-p)**n.

    Monotone nondecreasing in both arguments. Evaluated as
    -expm1(n*log1p(-p)), which agrees with the direct power form but stays
    accurate when n*p is small.
    """
    if not 0.0 <= survival_prob <= 1.0:
        raise ValueError("survival_prob must lie in [0, 1]")
    if n_feasible < 0:
        raise ValueError("n_feasible must be nonnegative")
    if n_feasible == 0 or survival_prob == 0.0:
        return 0.0
    if survival_prob == 1.0:
        return 1.0
    return -math.expm1(n_feasible * math.log1p(-survival_prob))


def bound_confidence(eta: float, alpha: float, survival_prob: float, n_feasible: int) -> float:
    """Minimum probability (1-eta)*(1-alpha)**2*(1-(1-p)**n) of the bound."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    retained = prob_any_feasible_retained(survival_prob, n_feasible)
    return (1.0 - eta) * (1.0 - alpha) ** 2 * retained


def count_feasible(predictions, best_prediction: float, radius: float) -> int:
    """Number of predictions within ``radius`` above ``best_prediction``.

    Stands in for the unknowable count of truly feasible options: true
    values are not available at decision time, so the predictions are
    scanned instead. With best_prediction = min(predictions) the count is
    always at least 1.
    """
    if radius < 0.0:
        raise ValueError("radius must be nonnegative")
    count = 0
    total = 0
    for p in predictions:
        total += 1
        if p - best_prediction <= radius:
            count += 1
    if total == 0:
        raise ValueError("predictions must be nonempty")
    return count


def decision_error_bound(
    inputs: RiskBoundInputs,
    domain: QualityDomain,
    cutoff: float,
    best_prediction: float,
    n_feasible: int,
) -> DecisionErrorBound:
    """Compose the full error/confidence bound for one adaptation decision.

    Args:
        inputs: trained-model facts (sample count, capacity, risks, verifier
            accuracy); validated on construction.
        domain: quality-value range; supplies the loss bounds.
        cutoff: reduction threshold that was applied to the predictions.
        best_prediction: minimum prediction over the complete space. Must
            not exceed the cutoff (any cutoff rule anchored at the minimum
            prediction guarantees this).
        n_feasible: number of options considered feasible, e.g. from
            :func:`count_feasible`.

    Returns:
        A :class:`DecisionErrorBound` with every intermediate term filled in.
    """
    if inputs.empirical_risk > domain.loss_upper:
        raise ValueError(
            f"empirical_risk {inputs.empirical_risk} exceeds the domain's loss bound {domain.loss_upper}"
        )
    nu = vc_confidence_term(inputs.m, inputs.vc_dim, inputs.eta)
    margin = risk_margin(domain, nu)
    adjusted = adjusted_risk_margin(margin, domain, inputs.kappa)
    risk_upper = inputs.empirical_risk + adjusted
    survival = reduction_survival_prob(cutoff, best_prediction, risk_upper)
    return DecisionErrorBound(
        confidence_term=nu,
        risk_margin=margin,
        adjusted_risk_margin=adjusted,
        expected_risk_upper=risk_upper,
        survival_prob=survival,
        n_feasible=n_feasible,
        best_prediction=best_prediction,
        cutoff=cutoff,
        error_bound=math.sqrt(risk_upper) + inputs.kappa,
        min_probability=bound_confidence(inputs.eta, inputs.alpha, survival, n_feasible),
    )
