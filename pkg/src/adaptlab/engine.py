"""Adaptation engine: the monitor-analyse-plan-execute loop over the network.

Each cycle the engine observes the drifted environment, predicts every
option's quality with the linear model, keeps only options predicted at or
under a cutoff, verifies the survivors with statistical model checking,
switches to the best verified option, retrains on the newly labeled
samples, and computes the decision-error bound for the cycle. During the
warm-up phase there is no model yet, so every option is verified and the
model is trained on the full space's labels.

In evaluation mode each cycle also consults the simulator's analytic
oracle for the true quality of the selected option and of the true best
option, giving a measured decision error to hold against the bound.

Everything is deterministic per (topology, config, walk, base seed):
per-cycle seeds for the environment walk and for SMC verification are
derived independently, so a re-run reproduces records bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .bounds import (
    DecisionErrorBound,
    Goal,
    QualityDomain,
    RiskBoundInputs,
    adjusted_risk_margin,
    count_feasible,
    decision_error_bound,
    risk_margin,
    vc_confidence_term,
    vc_dimension_linear,
)
from .netsim import (
    Environment,
    EnvironmentWalk,
    NetworkModel,
    NetworkTopology,
    enumerate_options,
    environment_step,
    feature_dim,
    features,
    initial_environment,
    true_expected_loss,
)
from .regression import LabeledSample, LinearModel, empirical_risk, fit, predict_batch
from .seeds import mix64
from .smc import SmcConfig, verify_options

_ENV_SEED_SALT = 0x454E5649524F4E  # distinct per-purpose salts so the
_SMC_SEED_SALT = 0x534D432D52554E  # walk and verification streams never collide


class CutoffRule(Enum):
    """Reduction-threshold rules. Only one exists today."""

    MIN_MEDIAN_QUARTER = "min-median-quarter"


@dataclass(frozen=True)
class EngineConfig:
    """Knobs of one experiment run."""

    warmup_cycles: int = 30
    total_cycles: int = 200
    eta: float = 0.05
    smc: SmcConfig = field(default_factory=lambda: SmcConfig(epsilon=0.01, alpha=0.1))
    cutoff_rule: CutoffRule = CutoffRule.MIN_MEDIAN_QUARTER
    evaluation_mode: bool = True
    window_factor: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        if self.warmup_cycles < 1:
            raise ValueError("warmup_cycles must be at least 1 (the model needs labeled data)")
        if self.total_cycles < self.warmup_cycles:
            raise ValueError("total_cycles must be at least warmup_cycles")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.window_factor < 1:
            raise ValueError("window_factor must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class CycleRecord:
    """Everything one adaptation cycle decided and observed.

    Fields that only exist after warm-up (cutoff, b_hat_w, bound,
    bound_holds) are None during warm-up; the oracle fields (b_r, b_w,
    measured_error) are None outside evaluation mode.
    """

    cycle: int
    reduced_size: int
    cutoff: float | None
    b_hat_w: float | None
    selected_id: int
    b_r: float | None
    b_w: float | None
    measured_error: float | None
    bound: DecisionErrorBound | None
    empirical_risk: float | None
    bound_holds: bool | None


def cutoff(predictions: Sequence[float]) -> float:
    """Reduction threshold: min + (median - min)/4.

    The median of an even-length list is its lower-middle order statistic,
    which keeps the threshold conservative and the rule exactly
    reproducible. The result is always >= the minimum prediction, so the
    best-predicted option always survives reduction.
    """
    if len(predictions) == 0:
        raise ValueError("cutoff needs at least one prediction")
    ordered = sorted(predictions)
    low = ordered[0]
    median = ordered[(len(ordered) - 1) // 2]
    return low + (median - low) / 4.0


def reduce_options(option_ids: Sequence[int], predictions: Sequence[float], threshold: float) -> list[int]:
    """Ids of options predicted at or under the threshold, in input order."""
    if len(option_ids) != len(predictions):
        raise ValueError("option ids and predictions must align")
    return [oid for oid, pred in zip(option_ids, predictions) if pred <= threshold]


class AdaptationEngine:
    """Stateful cycle runner; create one per experiment."""

    def __init__(
        self,
        topology: NetworkTopology,
        config: EngineConfig,
        walk: EnvironmentWalk | None = None,
        base_seed: int = 0,
    ):
        self.topology = topology
        self.config = config
        self.walk = walk if walk is not None else EnvironmentWalk()
        self.base_seed = base_seed
        self.options = enumerate_options(topology)
        self.domain = QualityDomain(lower=0.0, upper=100.0, goal=Goal.MINIMIZE)
        self.vc_dim = vc_dimension_linear(feature_dim(topology))
        self.window_cap = config.window_factor * len(self.options)
        self.env: Environment = initial_environment(topology)
        self.samples: list[LabeledSample] = []
        self.model: LinearModel | None = None
        self.completed_cycles = 0

    # -- one cycle ---------------------------------------------------------

    def run_cycle(self) -> CycleRecord:
        t = self.completed_cycles + 1
        if t > 1:
            self.env = environment_step_for_cycle(self.env, self.walk, self.base_seed, t)
        env = self.env
        smc_seed = mix64(self.base_seed, _SMC_SEED_SALT, t)

        warmup = t <= self.config.warmup_cycles
        if warmup:
            candidate_ids = [o.option_id for o in self.options]
            cut = None
            best_prediction = None
            predictions = None
        else:
            assert self.model is not None
            design = np.stack([features(self.topology, o, env) for o in self.options])
            predictions = predict_batch(self.model, design)
            best_prediction = float(predictions.min())
            cut = cutoff(predictions.tolist())
            candidate_ids = reduce_options(
                [o.option_id for o in self.options], predictions.tolist(), cut
            )

        verified = verify_options(
            [(oid, NetworkModel(self.topology, self.options[oid], env)) for oid in candidate_ids],
            self.config.smc,
            smc_seed,
            workers=self.config.workers,
        )
        selected_id, _ = min(verified, key=lambda pair: (pair[1].mean, pair[0]))

        for oid, est in verified:
            self.samples.append(
                LabeledSample(features=features(self.topology, self.options[oid], env), target=est.mean)
            )
        if len(self.samples) > self.window_cap:
            self.samples = self.samples[-self.window_cap:]
        self.model = fit(self.samples)
        risk = empirical_risk(self.model, self.samples)

        bound = None
        if not warmup:
            bound = self._cycle_bound(risk, predictions, best_prediction, cut)

        b_r = b_w = measured = None
        if self.config.evaluation_mode:
            truths = [true_expected_loss(self.topology, o, env) for o in self.options]
            b_w = min(truths)
            b_r = truths[selected_id]
            measured = b_r - b_w
        holds = None
        if bound is not None and measured is not None:
            holds = measured <= bound.error_bound

        self.completed_cycles = t
        return CycleRecord(
            cycle=t,
            reduced_size=len(candidate_ids),
            cutoff=cut,
            b_hat_w=best_prediction,
            selected_id=selected_id,
            b_r=b_r,
            b_w=b_w,
            measured_error=measured,
            bound=bound,
            empirical_risk=risk,
            bound_holds=holds,
        )

    def _cycle_bound(
        self,
        risk: float,
        predictions: np.ndarray,
        best_prediction: float,
        cut: float,
    ) -> DecisionErrorBound | None:
        """Compose the per-cycle decision-error bound, or None when the
        training window is still too small for the risk bound to apply."""
        m = len(self.samples)
        if self.vc_dim >= m or risk > self.domain.loss_upper:
            return None
        inputs = RiskBoundInputs(
            m=m,
            vc_dim=self.vc_dim,
            eta=self.config.eta,
            empirical_risk=risk,
            kappa=self.config.smc.kappa,
            alpha=self.config.smc.alpha,
        )
        confidence_term = vc_confidence_term(m, self.vc_dim, self.config.eta)
        margin = adjusted_risk_margin(risk_margin(self.domain, confidence_term), self.domain, inputs.kappa)
        radius = math.sqrt(risk + margin)
        n_feasible = count_feasible(predictions.tolist(), best_prediction, radius)
        return decision_error_bound(inputs, self.domain, cut, best_prediction, n_feasible)


def environment_step_for_cycle(
    env: Environment, walk: EnvironmentWalk, base_seed: int, cycle: int
) -> Environment:
    """The walk step taken before the given cycle, seeded independently of
    every other randomness consumer."""
    return environment_step(env, walk, mix64(base_seed, _ENV_SEED_SALT, cycle))


def run_experiment(
    topology: NetworkTopology,
    config: EngineConfig,
    walk: EnvironmentWalk | None = None,
    base_seed: int = 0,
) -> list[CycleRecord]:
    """Run the full loop for config.total_cycles cycles; deterministic per seed."""
    engine = AdaptationEngine(topology, config, walk, base_seed)
    return [engine.run_cycle() for _ in range(config.total_cycles)]
