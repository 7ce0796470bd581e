import math

import numpy as np
import pytest

from fedsae.selector import make_state, select, selection_probabilities, update_values


class TestUpdateValues:
    def test_value_is_root_n_times_loss(self):
        state = make_state(3, scale=0.01, al_rounds=0, clients_per_round=1)
        update_values(state, [(1, 4, 2.0)])
        assert state.values[1] == pytest.approx(4.0)

    def test_unreported_clients_unchanged(self):
        state = make_state(3, scale=0.01, al_rounds=0, clients_per_round=1)
        state.values[:] = [5.0, 6.0, 7.0]
        update_values(state, [(0, 9, 1.0)])
        assert state.values[0] == pytest.approx(3.0)
        assert state.values[1] == 6.0 and state.values[2] == 7.0

    def test_zero_loss_gives_zero_value(self):
        state = make_state(2, scale=0.01, al_rounds=0, clients_per_round=1)
        state.values[:] = [3.0, 3.0]
        update_values(state, [(0, 100, 0.0)])
        assert state.values[0] == 0.0

    def test_unknown_client_rejected(self):
        state = make_state(2, scale=0.01, al_rounds=0, clients_per_round=1)
        with pytest.raises(ValueError):
            update_values(state, [(5, 4, 1.0)])


class TestSelectionProbabilities:
    def test_equal_values_uniform(self):
        state = make_state(8, scale=0.01, al_rounds=0, clients_per_round=2)
        state.values[:] = 3.3
        assert np.allclose(selection_probabilities(state), 1 / 8, atol=1e-15)

    def test_zero_scale_uniform(self):
        state = make_state(5, scale=0.0, al_rounds=0, clients_per_round=2)
        state.values[:] = [0, 10, 100, 1000, 1e6]
        assert np.allclose(selection_probabilities(state), 0.2, atol=1e-15)

    def test_matches_direct_softmax_oracle(self):
        state = make_state(3, scale=0.01, al_rounds=0, clients_per_round=1)
        state.values[:] = [0.0, 100.0, 200.0]
        raw = [math.exp(0.01 * v) for v in (0.0, 100.0, 200.0)]
        expected = [r / sum(raw) for r in raw]
        assert np.allclose(selection_probabilities(state), expected, atol=1e-12)
        # proportional to (1, e, e^2)
        p = selection_probabilities(state)
        assert p[1] / p[0] == pytest.approx(math.e, rel=1e-12)
        assert p[2] / p[1] == pytest.approx(math.e, rel=1e-12)

    def test_sums_to_one_even_with_huge_values(self):
        state = make_state(4, scale=1.0, al_rounds=0, clients_per_round=1)
        state.values[:] = [1e6, 2e6, 3e6, 4e6]
        p = selection_probabilities(state)
        assert np.isfinite(p).all()
        assert abs(p.sum() - 1.0) < 1e-9

    def test_shift_invariance(self):
        scale = 0.05
        a = make_state(6, scale=scale, al_rounds=0, clients_per_round=1)
        b = make_state(6, scale=scale, al_rounds=0, clients_per_round=1)
        values = np.array([1.0, 4.0, 2.0, 8.0, 0.5, 3.0])
        a.values[:] = values
        b.values[:] = values + 7.0 / scale  # adds a constant to scale*values
        assert np.allclose(selection_probabilities(a), selection_probabilities(b), atol=1e-15)

    def test_raising_a_value_raises_its_probability(self):
        state = make_state(4, scale=0.1, al_rounds=0, clients_per_round=1)
        state.values[:] = [1.0, 2.0, 3.0, 4.0]
        before = selection_probabilities(state)[1]
        state.values[1] += 5.0
        after = selection_probabilities(state)[1]
        assert after > before


class TestSelect:
    def test_returns_k_distinct_sorted(self):
        state = make_state(20, scale=0.01, al_rounds=5, clients_per_round=7)
        for t in (1, 6):  # weighted and uniform paths
            ids = select(state, t, np.random.default_rng(0))
            assert len(ids) == 7
            assert len(set(ids.tolist())) == 7
            assert list(ids) == sorted(ids)

    def test_zero_al_rounds_always_uniform(self):
        weighted = make_state(10, scale=0.01, al_rounds=0, clients_per_round=3)
        weighted.values[:] = [100.0] + [0.0] * 9
        flat = make_state(10, scale=0.01, al_rounds=0, clients_per_round=3)
        for t in range(1, 6):
            a = select(weighted, t, np.random.default_rng(t))
            b = select(flat, t, np.random.default_rng(t))
            assert np.array_equal(a, b)  # values never influence the draw

    def test_dominant_value_always_selected_in_weighted_rounds(self):
        state = make_state(12, scale=0.01, al_rounds=50, clients_per_round=3)
        state.values[:] = 0.0
        state.values[4] = 1e5
        for t in range(1, 21):
            assert 4 in select(state, t, np.random.default_rng(t))

    def test_select_all_clients(self):
        state = make_state(6, scale=0.01, al_rounds=1, clients_per_round=6)
        assert list(select(state, 1, np.random.default_rng(1))) == list(range(6))
        assert list(select(state, 2, np.random.default_rng(2))) == list(range(6))

    def test_deterministic_given_stream(self):
        state = make_state(15, scale=0.01, al_rounds=3, clients_per_round=4)
        state.values[:] = np.arange(15.0)
        a = select(state, 2, np.random.default_rng(99))
        b = select(state, 2, np.random.default_rng(99))
        assert np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_state(3, scale=0.01, al_rounds=0, clients_per_round=4)
