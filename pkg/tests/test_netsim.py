"""Network simulator: enumeration, link model, oracle consistency, environment."""

import math

import numpy as np
import pytest

from adaptlab.netsim import (
    Environment,
    EnvironmentWalk,
    Link,
    LinkParams,
    Mote,
    NetworkModel,
    NetworkTopology,
    desk_topology,
    enumerate_options,
    environment_step,
    feature_dim,
    features,
    full_topology,
    initial_environment,
    link_delivery_prob,
    option_from_id,
    option_id_for,
    simulate_run,
    true_expected_loss,
)
from adaptlab.seeds import derive_seeds

DESK = desk_topology()
FULL = full_topology()


def one_hop_topology(rate=1):
    return NetworkTopology(
        name="one-hop",
        motes=(Mote(1, rate=rate, links=(Link(0, LinkParams(base_snr=5.0)),)),),
    )


class TestEnumeration:
    def test_space_sizes(self):
        assert DESK.option_count == 256
        assert FULL.option_count == 4096
        assert len(enumerate_options(DESK)) == 256

    def test_ids_are_sequential(self):
        options = enumerate_options(DESK)
        assert [o.option_id for o in options] == list(range(256))

    def test_round_trip_random_ids(self):
        rng = np.random.default_rng(101)
        for topo in (DESK, FULL):
            for oid in rng.integers(0, topo.option_count, size=100):
                option = option_from_id(topo, int(oid))
                assert option_id_for(topo, option.power_levels, option.split_choices) == int(oid)

    def test_encoding_is_injective(self):
        seen = {(o.power_levels, o.split_choices) for o in enumerate_options(DESK)}
        assert len(seen) == 256

    def test_rejects_out_of_range_id(self):
        with pytest.raises(ValueError):
            option_from_id(DESK, 256)
        with pytest.raises(ValueError):
            option_from_id(DESK, -1)

    def test_split_fractions_span_unit_interval(self):
        fractions = {o.split_fractions for o in enumerate_options(DESK)}
        assert ((0.0, 0.0) in fractions) and ((1.0, 1.0) in fractions)


class TestTopologyValidation:
    def test_parent_must_precede_child(self):
        with pytest.raises(ValueError, match="earlier mote"):
            NetworkTopology(
                name="bad",
                motes=(
                    Mote(1, rate=1, links=(Link(2, LinkParams(5.0)),)),
                    Mote(2, rate=1, links=(Link(0, LinkParams(5.0)),)),
                ),
            )

    def test_duplicate_parent_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            NetworkTopology(
                name="bad",
                motes=(
                    Mote(1, rate=1, links=(Link(0, LinkParams(5.0)),)),
                    Mote(2, rate=1, links=(Link(1, LinkParams(5.0)), Link(1, LinkParams(4.0)))),
                ),
            )

    def test_numbering_must_be_contiguous(self):
        with pytest.raises(ValueError, match="numbered"):
            NetworkTopology(
                name="bad",
                motes=(Mote(2, rate=1, links=(Link(0, LinkParams(5.0)),)),),
            )

    def test_desk_link_order_is_documented_shape(self):
        assert DESK.link_order == ((1, 0), (2, 0), (3, 0), (4, 1), (4, 2), (5, 2), (5, 3), (6, 3))
        assert DESK.split_motes == (4, 5)


class TestLinkModel:
    PARAMS = LinkParams(base_snr=5.0, power_gain=2.0, slope=0.9, threshold=2.0)

    def test_midpoint_is_half(self):
        # margin = 5 + 0 - 3 - 2 = 0 at the logistic midpoint
        assert link_delivery_prob(self.PARAMS, 0, interference=3.0) == pytest.approx(0.5, abs=1e-12)

    def test_monotone_in_power(self):
        low = link_delivery_prob(self.PARAMS, 0, interference=3.0)
        high = link_delivery_prob(self.PARAMS, 1, interference=3.0)
        assert high > low

    def test_monotone_in_interference(self):
        quiet = link_delivery_prob(self.PARAMS, 0, interference=1.0)
        noisy = link_delivery_prob(self.PARAMS, 0, interference=5.0)
        assert quiet > noisy

    def test_clamps(self):
        assert link_delivery_prob(self.PARAMS, 0, interference=1e9) == 0.005
        assert link_delivery_prob(self.PARAMS, 1, interference=-1e9) == 0.995


class TestAnalyticOracle:
    def test_perfect_links_lose_nothing(self):
        env = initial_environment(DESK)
        for option in enumerate_options(DESK)[:16]:
            assert true_expected_loss(DESK, option, env, delivery_override=1.0) == 0.0

    def test_one_hop_closed_form(self):
        topo = one_hop_topology(rate=1)
        env = initial_environment(topo)
        option = option_from_id(topo, 0)
        for q in (0.25, 0.5, 0.9):
            got = true_expected_loss(topo, option, env, delivery_override=q)
            assert got == pytest.approx(100.0 * (1.0 - q), rel=1e-12)

    def test_zero_traffic_is_zero_loss(self):
        topo = one_hop_topology(rate=1)
        env = Environment(interference=(2.0,), load=(0.01,), cycle=0)  # round(1*0.01) = 0 packets
        assert true_expected_loss(topo, option_from_id(topo, 0), env) == 0.0

    def test_range_and_determinism(self):
        env = initial_environment(DESK)
        losses = [true_expected_loss(DESK, o, env) for o in enumerate_options(DESK)]
        assert all(0.0 <= x <= 100.0 for x in losses)
        assert losses == [true_expected_loss(DESK, o, env) for o in enumerate_options(DESK)]

    def test_raising_all_powers_weakly_reduces_loss(self):
        env = initial_environment(DESK)
        max_level = DESK.power_level_count - 1
        for option in enumerate_options(DESK):
            boosted_id = option_id_for(DESK, (max_level,) * DESK.mote_count, option.split_choices)
            boosted = option_from_id(DESK, boosted_id)
            assert true_expected_loss(DESK, boosted, env) <= true_expected_loss(DESK, option, env) + 1e-12


class TestSimulation:
    def test_forced_delivery_extremes(self):
        env = initial_environment(DESK)
        option = option_from_id(DESK, 37)
        assert simulate_run(DESK, option, env, seed=5, delivery_override=1.0) == 0.0
        assert simulate_run(DESK, option, env, seed=5, delivery_override=0.0) == 1.0

    def test_outcomes_are_packet_fractions(self):
        """Every outcome is lost/generated for an integer count of lost packets."""
        env = initial_environment(DESK)
        model = NetworkModel(DESK, option_from_id(DESK, 201), env)
        generated = sum(max(0, round(m.rate * env.load[m.mote_id - 1])) for m in DESK.motes)
        outcomes = model.simulate_batch(derive_seeds(3, 2000))
        lost = outcomes * generated
        assert np.all((0.0 <= outcomes) & (outcomes <= 1.0))
        np.testing.assert_allclose(lost, np.round(lost), atol=1e-9)

    def test_scalar_equals_batch(self):
        env = initial_environment(DESK)
        model = NetworkModel(DESK, option_from_id(DESK, 90), env)
        seeds = derive_seeds(17, 50)
        batch = model.simulate_batch(seeds)
        scalar = [model.simulate(int(s)) for s in seeds]
        assert np.array_equal(batch, np.array(scalar))

    def test_deterministic_per_seed(self):
        env = initial_environment(DESK)
        option = option_from_id(DESK, 123)
        assert simulate_run(DESK, option, env, 42) == simulate_run(DESK, option, env, 42)

    def test_monte_carlo_matches_oracle(self):
        rng = np.random.default_rng(59)
        env = initial_environment(DESK)
        walk = EnvironmentWalk()
        for step in range(3):
            env = environment_step(env, walk, 7000 + step)
        for oid in rng.integers(0, 256, size=3):
            option = option_from_id(DESK, int(oid))
            model = NetworkModel(DESK, option, env)
            mc = 100.0 * float(model.simulate_batch(derive_seeds(int(oid), 50_000)).mean())
            truth = true_expected_loss(DESK, option, env)
            assert abs(mc - truth) < 0.4  # ~5 sigma at this sample size

    def test_zero_traffic_runs_return_zero(self):
        topo = one_hop_topology(rate=1)
        env = Environment(interference=(2.0,), load=(0.01,), cycle=0)
        model = NetworkModel(topo, option_from_id(topo, 0), env)
        assert np.array_equal(model.simulate_batch(derive_seeds(0, 10)), np.zeros(10))


class TestEnvironment:
    def test_initial_shape(self):
        env = initial_environment(DESK)
        assert len(env.interference) == DESK.link_count
        assert len(env.load) == DESK.mote_count
        assert env.cycle == 0

    def test_zero_width_walk_keeps_values(self):
        env = initial_environment(DESK)
        still = environment_step(env, EnvironmentWalk(interference_step=0.0, load_step=0.0), seed=5)
        assert still.interference == env.interference
        assert still.load == env.load
        assert still.cycle == env.cycle + 1

    def test_long_walk_stays_clamped(self):
        walk = EnvironmentWalk()
        env = initial_environment(DESK)
        for step in range(10_000):
            env = environment_step(env, walk, step)
        assert all(walk.interference_min <= v <= walk.interference_max for v in env.interference)
        assert all(walk.load_min <= v <= walk.load_max for v in env.load)
        assert env.cycle == 10_000

    def test_trajectory_is_seed_deterministic(self):
        walk = EnvironmentWalk()
        a = b = initial_environment(DESK)
        for step in range(50):
            a = environment_step(a, walk, 900 + step)
            b = environment_step(b, walk, 900 + step)
        assert a == b
        c = environment_step(initial_environment(DESK), walk, 1)
        d = environment_step(initial_environment(DESK), walk, 2)
        assert c != d


class TestFeatures:
    def test_dimension_is_constant_and_documented(self):
        env = initial_environment(DESK)
        dims = {features(DESK, o, env).shape[0] for o in enumerate_options(DESK)}
        assert dims == {feature_dim(DESK)}
        assert feature_dim(DESK) == 22  # 6 powers + 2 splits + 8 interference + 6 loads
        assert feature_dim(FULL) == 33

    def test_distinct_options_differ(self):
        env = initial_environment(DESK)
        a = features(DESK, option_from_id(DESK, 10), env)
        b = features(DESK, option_from_id(DESK, 11), env)
        assert not np.array_equal(a, b)

    def test_interference_is_local_coordinate(self):
        option = option_from_id(DESK, 77)
        env = initial_environment(DESK)
        bumped_interference = list(env.interference)
        bumped_interference[3] += 0.5
        bumped = Environment(interference=tuple(bumped_interference), load=env.load, cycle=0)
        a = features(DESK, option, env)
        b = features(DESK, option, bumped)
        diff = np.flatnonzero(a != b)
        settings_width = DESK.mote_count + len(DESK.split_motes)
        assert diff.tolist() == [settings_width + 3]
