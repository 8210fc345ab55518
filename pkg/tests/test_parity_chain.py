import math

import numpy as np
import pytest

from spreadlab.analytics import general_parity
from spreadlab.deposition import NonUniform, Uniform
from spreadlab.errors import DomainError, InsufficientSamples
from spreadlab.parity_chain import (
    VirtualStock,
    odd_fraction_after_transition,
    sample_spread_sequence,
    sweep,
    sweep_csv,
    transition_parities,
)


class TestVirtualStock:
    def test_mean_must_exceed_one(self):
        with pytest.raises(DomainError):
            VirtualStock(mean_spread=1.0)

    def test_unknown_distribution(self):
        with pytest.raises(DomainError):
            VirtualStock(mean_spread=2.0, spread_dist="zipf")


class TestSampleSpreadSequence:
    def test_geometric_mean_within_3_sigma(self, rng):
        n = 100_000
        stock = VirtualStock(mean_spread=2.0, n_samples=n)
        spreads = sample_spread_sequence(stock, rng)
        sigma = math.sqrt(2.0**2 - 2.0) / math.sqrt(n)
        assert abs(spreads.mean() - 2.0) < 3 * sigma
        assert spreads.min() >= 1

    def test_poisson_variant(self, rng):
        stock = VirtualStock(mean_spread=3.0, n_samples=50_000, spread_dist="poisson")
        spreads = sample_spread_sequence(stock, rng)
        assert abs(spreads.mean() - 3.0) < 0.05
        assert spreads.min() >= 1

    def test_degenerate_mean_is_almost_all_ones(self, rng):
        stock = VirtualStock(mean_spread=1.0001, n_samples=10_000)
        spreads = sample_spread_sequence(stock, rng)
        assert np.mean(spreads == 1) > 0.99

    def test_reproducible_for_fixed_seed(self):
        stock = VirtualStock(mean_spread=4.0, n_samples=1_000)
        a = sample_spread_sequence(stock, np.random.default_rng(8))
        b = sample_spread_sequence(stock, np.random.default_rng(8))
        assert np.array_equal(a, b)


class TestTransitions:
    def test_all_spread_2_forces_odd(self, rng):
        spreads = np.full(1_000, 2)
        kept, odd = transition_parities(spreads, Uniform(), rng)
        assert len(kept) == 1_000
        assert odd.all()

    def test_spread_1_excluded(self, rng):
        spreads = np.array([1, 1, 2, 1, 3])
        kept, odd = transition_parities(spreads, Uniform(), rng)
        assert len(kept) == 2

    def test_uniform_large_mean_tends_to_half(self, rng):
        # the geometric marginal keeps small spreads around, so the excess
        # over 1/2 decays only like 1/mean; compare two means
        near = odd_fraction_after_transition(
            VirtualStock(mean_spread=8.0, n_samples=200_000), rng
        )
        far = odd_fraction_after_transition(
            VirtualStock(mean_spread=200.0, n_samples=200_000), rng
        )
        assert far - 0.5 < near - 0.5
        assert abs(far - 0.5) < 0.02

    def test_insufficient_samples(self, rng):
        stock = VirtualStock(mean_spread=1.0001, n_samples=10_000)
        with pytest.raises(InsufficientSamples):
            odd_fraction_after_transition(stock, rng)

    def test_chain_frequencies_match_tables(self, rng):
        spreads = sample_spread_sequence(
            VirtualStock(mean_spread=3.0, n_samples=300_000), rng
        )
        for mech in (Uniform(), NonUniform(0.7)):
            kept, odd = transition_parities(spreads, mech, rng)
            for s in np.unique(kept):
                mask = kept == s
                n = int(mask.sum())
                if n < 10_000:
                    continue
                p = float(general_parity(mech, int(s)).p_odd())
                sigma = math.sqrt(max(p * (1 - p), 1e-12) / n)
                assert abs(odd[mask].mean() - p) <= max(3 * sigma, 1e-9), (mech, s)


class TestSweep:
    def test_row_cardinality_and_csv(self):
        rows = sweep([2.0, 4.0, 8.0], [Uniform(), NonUniform(0.7)], n_samples=5_000, seed=1)
        assert len(rows) == 6
        text = sweep_csv(rows, {"seed": 1})
        lines = text.splitlines()
        assert lines[0] == "# seed = 1"
        assert lines[1] == "mean_spread,mechanism,alpha,odd_fraction,n_transitions"
        assert len(lines) == 8

    def test_deterministic_and_thread_invariant(self):
        kwargs = dict(
            means=[1.5, 3.0],
            mechanisms=[Uniform(), NonUniform(0.7)],
            n_samples=20_000,
            seed=42,
        )
        assert sweep(**kwargs) == sweep(**kwargs)
        assert sweep(**kwargs, threads=3) == sweep(**kwargs)

    def test_both_mechanisms_stay_above_half_and_decrease(self):
        means = [1.5, 2.0, 3.0, 4.0, 6.0, 8.0]
        rows = sweep(means, [Uniform(), NonUniform(0.7)], n_samples=200_000, seed=7)
        for mech_name in ("uniform", "nonuniform"):
            fractions = [r.odd_fraction for r in rows if r.mechanism == mech_name]
            sigmas = [
                math.sqrt(0.25 / r.n_transitions)
                for r in rows
                if r.mechanism == mech_name
            ]
            for f, s in zip(fractions, sigmas):
                assert f >= 0.5 - 3 * s
            for i in range(len(fractions) - 1):
                gap = 3 * math.hypot(sigmas[i], sigmas[i + 1])
                assert fractions[i + 1] <= fractions[i] + gap
