import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_image
from oracles import mmd_loops, ssim_loops
from privlens import practicality as prac
from privlens.model import BBox, Detection, DetectionSet, EmbeddingSet, RasterImage, TimingLog


class TestFPS:
    def test_uniform(self):
        log = TimingLog(tuple((i, 0.1 * i) for i in range(10)))
        assert prac.fps(log) == pytest.approx(10 / 0.9)
        assert round(prac.fps(log), 3) == 11.111

    def test_two_frames(self):
        assert prac.fps(TimingLog(((0, 3.0), (1, 4.0)))) == 2.0

    def test_equal_timestamps(self):
        with pytest.raises(ValueError):
            prac.fps(TimingLog(((0, 0.0), (1, 0.0))))

    @settings(max_examples=100)
    @given(st.lists(st.floats(0.001, 5.0), min_size=1, max_size=30), st.floats(0, 100), st.integers(0, 2 ** 31 - 1))
    def test_interior_invariance(self, gaps, start, seed):
        ts = list(np.cumsum([start] + gaps))
        if len(set(ts)) != len(ts):
            return
        a = prac.fps(TimingLog(tuple(enumerate(ts))))
        rng = np.random.default_rng(seed)
        inner = sorted(rng.uniform(ts[0], ts[-1], len(ts) - 2)) if len(ts) > 2 else []
        moved = [ts[0], *inner, ts[-1]]
        if len(set(moved)) == len(moved):
            assert prac.fps(TimingLog(tuple(enumerate(moved)))) == a


class TestSSIM:
    def test_self(self, rng):
        img = random_image(rng, 17, 23)
        assert prac.ssim(img, img) == 1.0

    def test_black_vs_white(self):
        a = RasterImage(np.zeros((16, 16, 3), dtype=np.uint8))
        b = RasterImage(np.full((16, 16, 3), 255, dtype=np.uint8))
        v = prac.ssim(a, b)
        c1 = (0.01 * 255) ** 2
        assert v == pytest.approx(c1 / (255 ** 2 + c1))
        assert v < 0.01

    def test_mismatch(self, rng):
        with pytest.raises(prac.PracticalityError):
            prac.ssim(random_image(rng, 4, 4), random_image(rng, 4, 5))

    def test_matches_loop_oracle(self, rng):
        a, b = random_image(rng, 6, 7), random_image(rng, 6, 7)
        ref = ssim_loops(a.pixels.astype(float).tolist(), b.pixels.astype(float).tolist())
        assert prac.ssim(a, b) == pytest.approx(ref, abs=1e-9)

    def test_symmetric(self, rng):
        a, b = random_image(rng, 12, 12), random_image(rng, 12, 12)
        assert prac.ssim(a, b) == pytest.approx(prac.ssim(b, a), abs=1e-15)


def person(img, box, score=0.9):
    return Detection(img, 0, BBox(*box), score)


class TestRobustness:
    def setup_method(self):
        rng = np.random.default_rng(5)
        self.orig = {"a": random_image(rng, 32, 32), "b": random_image(rng, 32, 32)}
        self.dets = DetectionSet((person("a", (2, 2, 10, 12)), person("b", (10, 10, 12, 12)),
                                  Detection("b", 2, BBox(0, 0, 5, 5), 0.9)))

    def test_noop_counts_all_matches(self):
        assert prac.robustness(self.dets, self.dets, self.orig, self.orig) == 2

    def test_no_detections_after(self):
        assert prac.robustness(self.dets, DetectionSet(), self.orig, self.orig) == 0

    def test_one_identical_one_blacked(self):
        px = np.array(self.orig["b"].pixels)
        px[8:26, 8:26] = 0
        anon = {"a": self.orig["a"], "b": RasterImage(px)}
        res = prac.robustness_detail(self.dets, self.dets, self.orig, anon)
        assert res.matched == 2
        assert res.count == 1

    def test_threshold_and_iou(self):
        shifted = DetectionSet((person("a", (30, 30, 2, 2)), person("b", (10, 10, 12, 12))))
        assert prac.robustness(self.dets, shifted, self.orig, self.orig) == 1
        assert prac.robustness(self.dets, self.dets, self.orig, self.orig, ssim_thresh=1.01) == 0

    def test_missing_image(self):
        with pytest.raises(prac.PracticalityError, match="b"):
            prac.robustness(self.dets, self.dets, self.orig, {"a": self.orig["a"]})

    def test_resized_crops(self):
        small = {k: RasterImage(v.pixels[:20, :20]) for k, v in self.orig.items()}
        res = prac.robustness_detail(self.dets, self.dets, self.orig, small)
        assert res.matched == 2


class TestMMD:
    def test_identical(self, rng):
        x = EmbeddingSet(("a", "b", "c"), rng.normal(size=(3, 8)))
        assert prac.mmd(x, x) == 0.0

    def test_two_point(self):
        u, v = np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 2.0, 0.0]])
        d2 = 2.0  # between unit vectors e1 and e2
        expected = 1000 * 2 * (1 - math.exp(-d2 / (2 * 10 ** 2)))
        assert prac.mmd(u, v) == pytest.approx(expected, abs=1e-9)

    def test_duplicated_rows(self, rng):
        x = rng.normal(size=(4, 5))
        assert prac.mmd(x, np.vstack([x, x])) == pytest.approx(0.0, abs=1e-9)

    def test_matches_loops(self, rng):
        x, y = rng.normal(size=(5, 6)), rng.normal(size=(7, 6))
        assert prac.mmd(x, y, 2.0, 10.0) == pytest.approx(mmd_loops(x.tolist(), y.tolist(), 2.0, 10.0), abs=1e-9)
        assert prac.mmd(x, y) == pytest.approx(prac.mmd(y, x), abs=1e-12)

    def test_dim_mismatch(self, rng):
        with pytest.raises(prac.PracticalityError):
            prac.mmd(rng.normal(size=(2, 3)), rng.normal(size=(2, 4)))


class TestNormalization:
    def test_minmax(self):
        assert prac.normalize_invert({"a": 2, "b": 4, "c": 6}) == {"a": 0, "b": 0.5, "c": 1}

    def test_invert(self):
        assert prac.normalize_invert({"a": 2, "b": 4, "c": 6}, True) == {"a": 1, "b": 0.5, "c": 0}

    def test_all_equal(self):
        assert prac.normalize_invert({"a": 5, "b": 5, "c": 5}) == {"a": 0.5, "b": 0.5, "c": 0.5}

    def test_non_finite(self):
        with pytest.raises(prac.PracticalityError):
            prac.normalize_invert({"a": float("nan"), "b": 1})


class TestWeights:
    def test_unit_sum(self):
        with pytest.raises(prac.PracticalityError):
            prac.WeightVector(0.3, 0.3, 0.3)
        with pytest.raises(prac.PracticalityError):
            prac.WeightVector(1.2, -0.2, 0.0)

    def test_parse_fractions(self):
        w = prac.WeightVector.parse("1/3,1/3,1/3")
        assert sum(w.as_tuple()) == pytest.approx(1.0, abs=1e-15)
        assert prac.WeightVector.parse("0.8,0.1,0.1").as_tuple() == (0.8, 0.1, 0.1)
        with pytest.raises(prac.PracticalityError):
            prac.WeightVector.parse("0.3,0.3,0.3")


class TestPracticality:
    def inputs(self, fps, rob, mmd):
        names = [f"m{i}" for i in range(len(fps))]
        return prac.PracticalityInputs(dict(zip(names, fps)), dict(zip(names, rob)), dict(zip(names, mmd)))

    def test_hm_row(self):
        assert prac.fuse((0.94, 0.77, 0.51), prac.WeightVector(0.8, 0.1, 0.1)) == pytest.approx(0.880, abs=5e-4)

    def test_robustness_only(self):
        inp = self.inputs([10, 20, 30], [5, 0, 10], [1, 2, 3])
        scores = prac.practicality(inp, prac.WeightVector(1, 0, 0))
        assert scores == prac.normalize_invert(inp.robustness_count, invert=True)

    def test_identical_methods(self):
        inp = self.inputs([10, 10], [3, 3], [0.5, 0.5])
        assert prac.practicality(inp, prac.EQUAL_WEIGHTS) == pytest.approx({"m0": 0.5, "m1": 0.5})

    def test_input_validation(self):
        with pytest.raises(prac.PracticalityError):
            self.inputs([0.0], [1], [1])

    @settings(max_examples=60)
    @given(st.lists(st.tuples(st.floats(0.1, 1000), st.integers(0, 50), st.floats(0, 10)), min_size=2, max_size=8),
           st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 2))
    def test_affine_invariance_and_range(self, rows, a, b, which):
        fps, rob, mmd = map(list, zip(*rows))
        w = prac.WeightVector(0.5, 0.25, 0.25)
        base = prac.practicality(self.inputs(fps, rob, mmd), w)
        assert all(-1e-12 <= v <= 1 + 1e-12 for v in base.values())
        cols = [fps, [float(r) for r in rob], mmd]
        cols[which] = [a * v + b for v in cols[which]]
        if min(cols[which]) <= 0 and which == 0:
            return
        if min(cols[which]) < 0:
            return
        moved = prac.practicality(self.inputs(*cols), w)
        for k in base:
            assert moved[k] == pytest.approx(base[k], abs=1e-9)
