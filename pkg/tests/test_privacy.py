import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_ap
from privlens.model import AttributeScoreTable, PrivlensError, UndefinedMetricError
from privlens.privacy import PrivacyResult, average_precision, class_weights, cmap, relative_drop


def table(scores, labels, names=None, ids=None):
    scores = np.asarray(scores, dtype=float)
    n, c = scores.shape
    names = names or tuple(f"a{i}" for i in range(c))
    ids = ids or tuple(f"id{i:03d}" for i in range(n))
    return AttributeScoreTable(tuple(names), tuple(ids), scores, np.asarray(labels))


class TestAveragePrecision:
    def test_worked_example(self):
        ap = average_precision([0.9, 0.8, 0.7, 0.6], [1, 1, 0, 1])
        assert ap == pytest.approx((1 + 1 + 0.75) / 3, abs=1e-9)
        assert round(ap, 6) == 0.916667

    def test_perfect(self):
        assert average_precision([0.9, 0.7, 0.3, 0.1], [1, 1, 0, 0]) == 1.0

    def test_no_positive(self):
        with pytest.raises(UndefinedMetricError):
            average_precision([0.1, 0.2], [0, 0])

    def test_tie_break_by_id(self):
        # equal scores: the positive only ranks first when its id sorts first
        assert average_precision([0.5, 0.5], [1, 0], ["a", "b"]) == 1.0
        assert average_precision([0.5, 0.5], [1, 0], ["b", "a"]) == 0.5

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_matches_brute_force(self, data):
        n = data.draw(st.integers(1, 30))
        scores = data.draw(st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0, 0.1, 0.9]), min_size=n, max_size=n))
        labels = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        if not any(labels):
            labels[0] = 1
        ids = [f"{i:02d}" for i in data.draw(st.permutations(range(n)))]
        assert abs(average_precision(scores, labels, ids) - brute_force_ap(scores, labels, ids)) <= 1e-9

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 100).map(lambda v: v / 100), min_size=2, max_size=25), st.integers(0, 2 ** 31 - 1))
    def test_monotone_transform_invariance(self, scores, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, len(scores))
        labels[0] = 1
        ids = [f"x{i}" for i in range(len(scores))]
        base = average_precision(scores, labels, ids)
        squashed = [s ** 3 / 2 + 0.1 for s in scores]
        assert average_precision(squashed, labels, ids) == pytest.approx(base, abs=1e-12)
        assert 0.0 <= base <= 1.0


class TestCmap:
    def test_mean_of_two(self):
        # attribute a0: AP 1; a1: scores rank the positive second of 2 -> AP 0.5
        t = table([[0.9, 0.2], [0.1, 0.8]], [[1, 1], [0, 0]])
        res = cmap(t)
        assert res.per_attribute_ap == {"a0": 1.0, "a1": 0.5}
        assert res.cmap == 0.75

    def test_perfect_single(self):
        assert cmap(table([[0.9], [0.1]], [[1], [0]])).cmap == 1.0

    def test_skips_empty_attribute(self):
        # a0 AP 0.5 (positive ranked second), a1 no positives, a2 AP 0.7 via oracle construction
        scores = [[0.4, 0.3, 0.9], [0.9, 0.2, 0.8], [0.1, 0.1, 0.7], [0.05, 0.6, 0.6], [0.0, 0.5, 0.5]]
        labels = [[1, 0, 1], [0, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 1]]
        ap2 = brute_force_ap([r[2] for r in scores], [r[2] for r in labels], [f"id{i:03d}" for i in range(5)])
        assert ap2 == pytest.approx(0.7)
        res = cmap(table(scores, labels))
        assert res.skipped_attributes == ("a1",)
        assert res.per_attribute_ap["a0"] == 0.5
        assert res.cmap == pytest.approx(0.6, abs=1e-12)

    def test_all_skipped(self):
        with pytest.raises(UndefinedMetricError):
            cmap(table([[0.5]], [[0]]))

    def test_row_permutation_invariant(self, rng):
        scores = rng.choice([0.2, 0.4, 0.6], size=(15, 3))
        labels = rng.integers(0, 2, (15, 3))
        labels[0] = 1
        ids = [f"r{i}" for i in range(15)]
        perm = rng.permutation(15)
        a = cmap(table(scores, labels, ids=ids))
        b = cmap(table(scores[perm], labels[perm], ids=[ids[i] for i in perm]))
        assert a == b
        assert min(a.per_attribute_ap.values()) <= a.cmap <= max(a.per_attribute_ap.values())


class TestRelativeDrop:
    def res(self, **aps):
        return PrivacyResult(aps, float(np.mean(list(aps.values()))))

    def test_values(self):
        drop = relative_drop(self.res(x=0.5, y=0.5, z=0.5), self.res(x=0.4, y=0.5, z=0.55))
        assert drop["x"] == pytest.approx(20.0)
        assert drop["y"] == 0.0
        assert drop["z"] == pytest.approx(-10.0)

    def test_undefined(self):
        assert relative_drop(self.res(x=0.0), self.res(x=0.3)) == {"x": None}

    def test_mismatched_attributes(self):
        with pytest.raises(PrivlensError):
            relative_drop(self.res(x=0.5), self.res(y=0.5))

    def test_self_drop_zero(self, rng):
        r = self.res(**{f"a{i}": float(v) for i, v in enumerate(rng.random(6) + 0.01)})
        assert set(relative_drop(r, r).values()) == {0.0}


class TestClassWeights:
    def test_formula(self):
        labels = np.zeros((100, 2), dtype=int)
        labels[:25, 0] = 1
        labels[:50, 1] = 1
        w = class_weights(table(np.zeros((100, 2)), labels))
        assert w["a0"] == 2.0
        assert w["a1"] == 1.0

    def test_all_positive(self):
        w = class_weights(table(np.zeros((4, 3)), np.ones((4, 3), dtype=int)))
        assert all(v == pytest.approx(1 / 3) for v in w.values())

    def test_single(self):
        assert class_weights(table(np.zeros((10, 1)), np.ones((10, 1), dtype=int))) == {"a0": 1.0}

    def test_no_positive(self):
        with pytest.raises(PrivlensError, match="a1"):
            class_weights(table(np.zeros((3, 2)), [[1, 0]] * 3))
