"""Tests for the burn-in store, gate decisions, and stratification."""

import numpy as np
import pytest

from annealmon.errors import ModelError, NotReadyError
from annealmon.monitor import BurnInStore, stratify


class TestObserve:
    def test_single_value(self):
        store = BurnInStore(burn_in=1)
        store.observe(2.5)
        assert len(store) == 1
        assert store.running_min == store.running_max == 2.5

    def test_running_extrema(self):
        store = BurnInStore(burn_in=1)
        for v in (3.0, 1.0, 2.0):
            store.observe(v)
        assert store.running_min == 1.0
        assert store.running_max == 3.0

    def test_serialization_round_trip(self):
        store = BurnInStore(burn_in=3, cap=10)
        for v in (0.1, -2.0, 5.5, 0.3):
            store.observe(v)
        restored = BurnInStore.from_json(store.to_json())
        assert restored.history == store.history
        assert restored.burn_in == store.burn_in
        assert restored.cap == store.cap
        assert restored.running_min == store.running_min
        assert restored.running_max == store.running_max

    def test_file_round_trip(self, tmp_path):
        store = BurnInStore(burn_in=2)
        store.observe(1.0).observe(7.0)
        path = tmp_path / "store.json"
        store.save(str(path))
        assert BurnInStore.load(str(path)).history == [1.0, 7.0]

    def test_cap_keeps_recent(self):
        store = BurnInStore(burn_in=2, cap=3)
        for v in range(6):
            store.observe(float(v))
        assert store.history == [3.0, 4.0, 5.0]
        assert store.ready  # seen count is not reduced by the cap


class TestPercentileRank:
    @pytest.fixture
    def store(self):
        s = BurnInStore(burn_in=4)
        for v in (1.0, 2.0, 3.0, 4.0):
            s.observe(v)
        return s

    def test_below_all(self, store):
        assert store.percentile_rank(0.0) == 0.0

    def test_above_all(self, store):
        assert store.percentile_rank(10.0) == 1.0

    def test_interior(self, store):
        assert store.percentile_rank(2.5) == 0.5

    def test_ties_counted_half(self, store):
        assert store.percentile_rank(2.0) == (1 + 0.5) / 4

    def test_not_ready(self):
        s = BurnInStore(burn_in=4)
        s.observe(1.0)
        with pytest.raises(NotReadyError):
            s.percentile_rank(1.0)

    def test_monotone_in_value(self, store, rng):
        values = np.sort(rng.uniform(-1, 6, size=50))
        ranks = [store.percentile_rank(float(v)) for v in values]
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))


class TestGate:
    @pytest.fixture
    def store(self):
        s = BurnInStore(burn_in=5)
        for v in (0.0, 1.0, 2.0, 3.0, 10.0):
            s.observe(v)
        return s

    def test_accept_below_threshold(self, store):
        decision = store.gate(3.0, tau=0.5)
        assert decision.normalized_e == pytest.approx(0.3)
        assert decision.accept

    def test_reject_above_threshold(self, store):
        decision = store.gate(7.0, tau=0.5)
        assert decision.normalized_e == pytest.approx(0.7)
        assert not decision.accept

    def test_clamped_outside_history(self, store):
        assert store.gate(-5.0, tau=0.5).normalized_e == 0.0
        assert store.gate(25.0, tau=0.5).normalized_e == 1.0

    def test_never_before_burn_in(self):
        s = BurnInStore(burn_in=10)
        for i in range(9):
            s.observe(float(i))
            with pytest.raises(NotReadyError):
                s.gate(1.0, tau=0.5)
        s.observe(9.0)
        assert s.gate(1.0, tau=0.5).accept

    def test_degenerate_history(self):
        s = BurnInStore(burn_in=2)
        s.observe(1.0).observe(1.0)
        with pytest.raises(NotReadyError):
            s.gate(1.0, tau=0.5)

    def test_tau_validated(self, store):
        with pytest.raises(ModelError):
            store.gate(1.0, tau=1.5)

    def test_new_minimum_shifts_normalization(self, rng):
        # after observing a lower minimum, the same value normalizes higher
        s = BurnInStore(burn_in=3)
        for v in (0.0, 5.0, 10.0):
            s.observe(v)
        before = s.gate(4.0, tau=0.5).normalized_e
        s.observe(-10.0)
        after = s.gate(4.0, tau=0.5).normalized_e
        assert after > before

    def test_online_stream_monotone_normalization(self, rng):
        # property: normalized_e is a non-decreasing function of the raw value
        # against any fixed history
        s = BurnInStore(burn_in=5)
        for v in rng.normal(size=50):
            s.observe(float(v))
        values = np.sort(rng.normal(size=30))
        es = [s.gate(float(v), tau=0.5).normalized_e for v in values]
        assert all(a <= b for a, b in zip(es, es[1:]))


class TestStratify:
    def test_default_cuts(self):
        strat = stratify([1.0, 2.0, 3.0], [0.1, 0.5, 0.9])
        assert strat.cuts == (0.2, 0.8)
        assert strat.low_set.tolist() == [1.0]
        assert strat.high_set.tolist() == [3.0]

    def test_all_low(self):
        strat = stratify([1.0, 2.0], [0.0, 0.0])
        assert strat.low_set.tolist() == [1.0, 2.0]
        assert strat.high_set.size == 0

    def test_disjoint_by_construction(self, rng):
        p = rng.normal(size=200)
        e = rng.random(200)
        strat = stratify(p, e)
        assert strat.low_set.size + strat.high_set.size <= 200
        assert strat.low_set.size == np.count_nonzero(e <= 0.2)
        assert strat.high_set.size == np.count_nonzero(e >= 0.8)

    def test_length_mismatch(self):
        with pytest.raises(ModelError):
            stratify([1.0], [0.5, 0.6])

    def test_cut_validation(self):
        with pytest.raises(ModelError):
            stratify([1.0], [0.5], low=0.8, high=0.2)
