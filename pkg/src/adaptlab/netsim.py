"""Multi-hop wireless sensor network simulator with an analytic loss oracle.

The managed system is a small IoT network: motes generate packets each
period and forward them hop by hop toward a single gateway (id 0) over
lossy links. Per-link delivery probability follows a logistic curve in an
SNR-like margin (base SNR + power gain - interference - threshold),
clamped away from 0 and 1 so links are never degenerate. The environment
(per-link interference, per-mote traffic load) drifts between adaptation
cycles as a bounded random walk.

An adaptation option fixes, per mote, a transmission power level and -
for motes with two parents - how generated and relayed traffic is split
between them. Options are enumerated by a mixed-radix encoding of those
settings, so option ids are stable and bijective.

Two evaluations of the same configuration are provided:

- ``true_expected_loss``: exact expected packet-loss percentage by
  propagating expected traffic through the DAG (no sampling). Used as the
  ground-truth oracle when measuring decision error.
- ``simulate_run`` / ``NetworkModel``: one stochastic period, sampling
  every packet's route and per-hop delivery. Each packet draw is addressed
  by (seed, stream index), so a batch of runs is bit-identical to the same
  runs executed one by one - which is what makes SMC estimates over this
  model reproducible and parallelizable.

Packet counts per mote are ``round(rate * load)`` - deterministic given
the environment - and a packet's parent choice is sampled per packet, so
the analytic oracle is exact, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeds import bernoulli_from_stream, hash01, mix64, stream_uint64

# Delivery probabilities are kept inside [Q_FLOOR, Q_CEIL] so no link is
# ever a guaranteed success or a guaranteed drop.
Q_FLOOR = 0.005
Q_CEIL = 0.995


@dataclass(frozen=True)
class LinkParams:
    """Logistic delivery curve of one directed link."""

    base_snr: float
    power_gain: float = 2.0
    slope: float = 0.9
    threshold: float = 2.0


@dataclass(frozen=True)
class Link:
    parent: int
    params: LinkParams


@dataclass(frozen=True)
class Mote:
    """One traffic-generating node; links point toward the gateway."""

    mote_id: int
    rate: int
    links: tuple[Link, ...]


@dataclass(frozen=True)
class NetworkTopology:
    """DAG of motes draining into gateway id 0.

    Motes are numbered 1..K in order; every link's parent must carry a
    smaller id (the gateway or an earlier mote), which guarantees a DAG
    with all paths reaching the gateway. Each mote has one or two parents.
    """

    name: str
    motes: tuple[Mote, ...]
    power_level_count: int = 2
    split_level_count: int = 2

    def __post_init__(self) -> None:
        if self.power_level_count < 2 or self.split_level_count < 2:
            raise ValueError("power and split settings need at least two levels")
        for index, mote in enumerate(self.motes):
            if mote.mote_id != index + 1:
                raise ValueError(f"motes must be numbered 1..K in order, got id {mote.mote_id} at position {index}")
            if not 1 <= len(mote.links) <= 2:
                raise ValueError(f"mote {mote.mote_id} must have 1 or 2 parents")
            parents = [link.parent for link in mote.links]
            if len(set(parents)) != len(parents):
                raise ValueError(f"mote {mote.mote_id} lists a duplicate parent")
            for parent in parents:
                if not 0 <= parent < mote.mote_id:
                    raise ValueError(f"mote {mote.mote_id} parent {parent} must be the gateway or an earlier mote")
            if mote.rate < 0:
                raise ValueError(f"mote {mote.mote_id} rate must be nonnegative")

    @property
    def mote_count(self) -> int:
        return len(self.motes)

    @property
    def link_order(self) -> tuple[tuple[int, int], ...]:
        """(child, parent) pairs in the canonical order used everywhere:
        motes ascending, each mote's links in declared order."""
        return tuple((m.mote_id, link.parent) for m in self.motes for link in m.links)

    @property
    def link_count(self) -> int:
        return sum(len(m.links) for m in self.motes)

    @property
    def split_motes(self) -> tuple[int, ...]:
        """Ids of motes with two parents, ascending."""
        return tuple(m.mote_id for m in self.motes if len(m.links) == 2)

    @property
    def option_count(self) -> int:
        return self.power_level_count ** self.mote_count * self.split_level_count ** len(self.split_motes)

    def _radices(self) -> list[int]:
        return [self.power_level_count] * self.mote_count + [self.split_level_count] * len(self.split_motes)


@dataclass(frozen=True)
class AdaptationOption:
    """One full network configuration, bijectively identified by ``option_id``.

    power_levels holds one level per mote (ascending mote id);
    split_choices one level per two-parent mote (ascending id), where
    level L out of S levels sends the fraction L/(S-1) of that mote's
    traffic to its first-listed parent.
    """

    option_id: int
    power_levels: tuple[int, ...]
    split_choices: tuple[int, ...]
    split_level_count: int = 2

    @property
    def split_fractions(self) -> tuple[float, ...]:
        top = self.split_level_count - 1
        return tuple(level / top for level in self.split_choices)


def option_from_id(topology: NetworkTopology, option_id: int) -> AdaptationOption:
    """Decode a mixed-radix option id into its settings tuple."""
    if not 0 <= option_id < topology.option_count:
        raise ValueError(f"option_id {option_id} outside [0, {topology.option_count})")
    digits = []
    remainder = option_id
    for radix in topology._radices():
        remainder, digit = divmod(remainder, radix)
        digits.append(digit)
    k = topology.mote_count
    return AdaptationOption(
        option_id=option_id,
        power_levels=tuple(digits[:k]),
        split_choices=tuple(digits[k:]),
        split_level_count=topology.split_level_count,
    )


def option_id_for(topology: NetworkTopology, power_levels: tuple[int, ...], split_choices: tuple[int, ...]) -> int:
    """Inverse of :func:`option_from_id`."""
    digits = list(power_levels) + list(split_choices)
    radices = topology._radices()
    if len(digits) != len(radices):
        raise ValueError("settings tuple does not match the topology's choice structure")
    option_id = 0
    stride = 1
    for digit, radix in zip(digits, radices):
        if not 0 <= digit < radix:
            raise ValueError(f"setting {digit} outside its radix {radix}")
        option_id += digit * stride
        stride *= radix
    return option_id


def enumerate_options(topology: NetworkTopology) -> list[AdaptationOption]:
    """The complete adaptation space, ids 0..option_count-1 in order."""
    return [option_from_id(topology, i) for i in range(topology.option_count)]


@dataclass(frozen=True)
class EnvironmentWalk:
    """Step sizes and clamps of the environment's random walk."""

    interference_step: float = 0.5
    load_step: float = 0.1
    interference_min: float = 0.0
    interference_max: float = 6.0
    load_min: float = 0.5
    load_max: float = 2.0


@dataclass(frozen=True)
class Environment:
    """Per-link interference and per-mote load at one adaptation cycle."""

    interference: tuple[float, ...]
    load: tuple[float, ...]
    cycle: int = 0


def initial_environment(topology: NetworkTopology, interference: float = 2.0, load: float = 1.0) -> Environment:
    return Environment(
        interference=(interference,) * topology.link_count,
        load=(load,) * topology.mote_count,
        cycle=0,
    )


def environment_step(env: Environment, walk: EnvironmentWalk, seed: int) -> Environment:
    """Advance the bounded random walk by one cycle, deterministically per seed."""
    base = mix64(seed)
    interference = tuple(
        min(walk.interference_max, max(walk.interference_min,
            value + (2.0 * hash01(base, 1, i) - 1.0) * walk.interference_step))
        for i, value in enumerate(env.interference)
    )
    load = tuple(
        min(walk.load_max, max(walk.load_min,
            value + (2.0 * hash01(base, 2, j) - 1.0) * walk.load_step))
        for j, value in enumerate(env.load)
    )
    return Environment(interference=interference, load=load, cycle=env.cycle + 1)


def link_delivery_prob(params: LinkParams, power_level: int, interference: float) -> float:
    """Delivery probability of one link: clamped logistic in the SNR margin."""
    margin = params.base_snr + params.power_gain * power_level - interference - params.threshold
    z = params.slope * margin
    if z >= 0.0:
        q = 1.0 / (1.0 + math.exp(-z))
    else:  # exp(-z) overflows for very negative margins; this branch underflows instead
        e = math.exp(z)
        q = e / (1.0 + e)
    return min(Q_CEIL, max(Q_FLOOR, q))


def features(topology: NetworkTopology, option: AdaptationOption, env: Environment) -> np.ndarray:
    """Feature vector: settings then environment readings, fixed ordering.

    Layout: power level per mote (ascending id), split fraction per
    two-parent mote (ascending id), interference per link (canonical link
    order), load per mote (ascending id).
    """
    return np.concatenate([
        np.asarray(option.power_levels, dtype=np.float64),
        np.asarray(option.split_fractions, dtype=np.float64),
        np.asarray(env.interference, dtype=np.float64),
        np.asarray(env.load, dtype=np.float64),
    ])


def feature_dim(topology: NetworkTopology) -> int:
    return 2 * topology.mote_count + len(topology.split_motes) + topology.link_count


def _generated_packets(topology: NetworkTopology, env: Environment) -> list[int]:
    # round() is banker's rounding; fine, it just needs to be deterministic
    # and shared with the analytic oracle.
    return [max(0, round(m.rate * env.load[m.mote_id - 1])) for m in topology.motes]


def _link_probs(
    topology: NetworkTopology,
    option: AdaptationOption,
    env: Environment,
    delivery_override: float | None,
) -> dict[tuple[int, int], float]:
    probs = {}
    for index, (child, parent) in enumerate(topology.link_order):
        if delivery_override is not None:
            probs[(child, parent)] = delivery_override
        else:
            params = next(l.params for l in topology.motes[child - 1].links if l.parent == parent)
            probs[(child, parent)] = link_delivery_prob(
                params, option.power_levels[child - 1], env.interference[index]
            )
    return probs


def _route_weights(topology: NetworkTopology, option: AdaptationOption) -> dict[int, tuple[float, ...]]:
    """Per mote, the fraction of its traffic sent over each of its links."""
    split_index = {mote_id: i for i, mote_id in enumerate(topology.split_motes)}
    weights = {}
    for mote in topology.motes:
        if len(mote.links) == 1:
            weights[mote.mote_id] = (1.0,)
        else:
            w = option.split_fractions[split_index[mote.mote_id]]
            weights[mote.mote_id] = (w, 1.0 - w)
    return weights


def true_expected_loss(
    topology: NetworkTopology,
    option: AdaptationOption,
    env: Environment,
    delivery_override: float | None = None,
) -> float:
    """Exact expected packet-loss percentage for one configuration.

    Closed form: the probability a packet at mote i reaches the gateway is
    reach(i) = sum over links of route_weight * delivery_prob * reach(parent),
    evaluated in ascending mote order (parents first). Loss is
    100 * (1 - delivered/generated) over deterministic per-mote packet counts.
    """
    probs = _link_probs(topology, option, env, delivery_override)
    weights = _route_weights(topology, option)
    generated = _generated_packets(topology, env)
    total = sum(generated)
    if total == 0:
        return 0.0
    reach = {0: 1.0}
    for mote in topology.motes:
        reach[mote.mote_id] = sum(
            w * probs[(mote.mote_id, link.parent)] * reach[link.parent]
            for w, link in zip(weights[mote.mote_id], mote.links)
        )
    delivered = sum(g * reach[m.mote_id] for g, m in zip(generated, topology.motes))
    return 100.0 * (1.0 - delivered / total)


class NetworkModel:
    """One (topology, option, environment) triple as a stochastic model.

    ``simulate`` plays one network period and returns the lost-packet
    fraction in [0, 1]. Every packet's route and delivery draw is addressed
    by (run seed, stream index): mote processing order, per-mote slot
    capacities, and stream offsets are all fixed at construction, so
    ``simulate_batch`` over many seeds is bit-identical to ``simulate``
    run per seed.
    """

    def __init__(
        self,
        topology: NetworkTopology,
        option: AdaptationOption,
        env: Environment,
        delivery_override: float | None = None,
    ):
        self.topology = topology
        self.option = option
        self.env = env
        probs = _link_probs(topology, option, env, delivery_override)
        weights = _route_weights(topology, option)
        self._generated = _generated_packets(topology, env)
        self._total_generated = sum(self._generated)

        # Children before parents: parent ids are smaller by construction.
        order = sorted(topology.motes, key=lambda m: m.mote_id, reverse=True)
        caps: dict[int, int] = {m.mote_id: 0 for m in topology.motes}
        inbound: dict[int, int] = {i: 0 for i in range(topology.mote_count + 1)}
        for mote in order:
            cap = self._generated[mote.mote_id - 1] + inbound[mote.mote_id]
            caps[mote.mote_id] = cap
            for w, link in zip(weights[mote.mote_id], mote.links):
                if w > 0.0:
                    inbound[link.parent] += cap

        # Per-mote plan rows: (mote_id, cap, stream_base, first_weight,
        # [(parent, q), ...]); stream layout is 2 draws per slot
        # (route, delivery) whether or not the route draw is consumed.
        self._plan = []
        base = 0
        for mote in order:
            links = [(link.parent, probs[(mote.mote_id, link.parent)]) for link in mote.links]
            first_weight = weights[mote.mote_id][0]
            self._plan.append((mote.mote_id, caps[mote.mote_id], base, first_weight, links))
            base += 2 * caps[mote.mote_id]

    def simulate(self, seed: int) -> float:
        return float(self.simulate_batch(np.array([seed & (2**64 - 1)], dtype=np.uint64))[0])

    def simulate_batch(self, seeds: np.ndarray) -> np.ndarray:
        seeds = np.asarray(seeds, dtype=np.uint64)
        n_runs = seeds.shape[0]
        total = self._total_generated
        if total == 0:
            return np.zeros(n_runs, dtype=np.float64)
        arrivals = {i: np.zeros(n_runs, dtype=np.int64) for i in range(self.topology.mote_count + 1)}
        seeds_col = seeds[:, None]
        for mote_id, cap, base, first_weight, links in self._plan:
            if cap == 0:
                continue
            packets = arrivals[mote_id] + self._generated[mote_id - 1]
            slots = np.arange(cap, dtype=np.int64)
            active = slots[None, :] < packets[:, None]
            stream = np.uint64(base) + np.uint64(2) * slots.astype(np.uint64)
            delivery_draws = stream_uint64(seeds_col, (stream + np.uint64(1))[None, :])
            if len(links) == 2 and 0.0 < first_weight < 1.0:
                route_draws = stream_uint64(seeds_col, stream[None, :])
                to_first = bernoulli_from_stream(route_draws, first_weight)
            else:
                to_first = np.full((n_runs, cap), first_weight >= 1.0 or len(links) == 1)
            parent, q = links[0]
            delivered = active & to_first & bernoulli_from_stream(delivery_draws, q)
            arrivals[parent] += delivered.sum(axis=1)
            if len(links) == 2:
                parent2, q2 = links[1]
                delivered2 = active & ~to_first & bernoulli_from_stream(delivery_draws, q2)
                arrivals[parent2] += delivered2.sum(axis=1)
        lost = total - arrivals[0]
        return lost.astype(np.float64) / total


def simulate_run(
    topology: NetworkTopology,
    option: AdaptationOption,
    env: Environment,
    seed: int,
    delivery_override: float | None = None,
) -> float:
    """One stochastic network period; lost/generated fraction in [0, 1]."""
    return NetworkModel(topology, option, env, delivery_override).simulate(seed)


def desk_topology() -> NetworkTopology:
    """6 motes + gateway, 8 binary choices, 256 options.

    Small enough that every option can be SMC-verified and oracle-checked
    each cycle. Layer 1 (motes 1-3) uplinks to the gateway; layer 2
    (motes 4-6) routes through layer 1, motes 4 and 5 with a choice of
    parent. Base SNRs are deliberately uneven so power and routing
    choices genuinely matter.
    """
    return NetworkTopology(
        name="desk",
        motes=(
            Mote(1, rate=3, links=(Link(0, LinkParams(base_snr=5.5)),)),
            Mote(2, rate=3, links=(Link(0, LinkParams(base_snr=5.0)),)),
            Mote(3, rate=3, links=(Link(0, LinkParams(base_snr=6.0)),)),
            Mote(4, rate=4, links=(Link(1, LinkParams(base_snr=4.5)), Link(2, LinkParams(base_snr=5.5)))),
            Mote(5, rate=4, links=(Link(2, LinkParams(base_snr=5.0)), Link(3, LinkParams(base_snr=4.0)))),
            Mote(6, rate=4, links=(Link(3, LinkParams(base_snr=5.0)),)),
        ),
    )


def full_topology() -> NetworkTopology:
    """9 motes + gateway, 12 binary choices, 4096 options."""
    return NetworkTopology(
        name="full",
        motes=(
            Mote(1, rate=3, links=(Link(0, LinkParams(base_snr=5.5)),)),
            Mote(2, rate=3, links=(Link(0, LinkParams(base_snr=5.0)),)),
            Mote(3, rate=3, links=(Link(0, LinkParams(base_snr=6.0)),)),
            Mote(4, rate=4, links=(Link(1, LinkParams(base_snr=4.5)), Link(2, LinkParams(base_snr=5.5)))),
            Mote(5, rate=4, links=(Link(2, LinkParams(base_snr=5.0)), Link(3, LinkParams(base_snr=4.0)))),
            Mote(6, rate=4, links=(Link(1, LinkParams(base_snr=4.0)), Link(3, LinkParams(base_snr=5.5)))),
            Mote(7, rate=4, links=(Link(1, LinkParams(base_snr=5.0)),)),
            Mote(8, rate=4, links=(Link(2, LinkParams(base_snr=4.5)),)),
            Mote(9, rate=4, links=(Link(3, LinkParams(base_snr=5.0)),)),
        ),
    )


TOPOLOGY_PRESETS = {
    "desk": desk_topology,
    "full": full_topology,
}
