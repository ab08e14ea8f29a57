import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import box_iou, pr_sweep_ap
from privlens.model import BBox, Detection, DetectionSet, GroundTruth, GroundTruthSet, UndefinedMetricError
from privlens.privacy import average_precision
from privlens.utility import evaluate_utility, iou, match_detections, pr_curve, prf1, prf1_counts

boxes = st.builds(BBox, st.integers(0, 20), st.integers(0, 20), st.integers(1, 15), st.integers(1, 15))


def det(img, cls, box, score):
    return Detection(img, cls, BBox(*box), score)


def gt(img, cls, box):
    return GroundTruth(img, cls, BBox(*box))


class TestIoU:
    def test_identical(self):
        assert iou(BBox(1, 2, 3, 4), BBox(1, 2, 3, 4)) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 5, 5), BBox(10, 10, 5, 5)) == 0.0

    def test_half_overlap(self):
        assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 10, 10)) == pytest.approx(50 / 150)

    @given(boxes, boxes)
    def test_properties(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(box_iou(a.as_list(), b.as_list()))


class TestMatching:
    def test_exact_match(self):
        m = match_detections(DetectionSet((det("a", 0, (0, 0, 10, 10), 0.9),)),
                             GroundTruthSet((gt("a", 0, (0, 0, 10, 10)),)))
        assert m.counts(0) == (1, 0, 0)

    def test_higher_score_wins(self):
        m = match_detections(DetectionSet((det("a", 0, (1, 0, 10, 10), 0.8), det("a", 0, (0, 0, 10, 10), 0.9))),
                             GroundTruthSet((gt("a", 0, (0, 0, 10, 10)),)))
        assert m.counts(0) == (1, 1, 0)
        assert m.matched_pairs[0][0].score == 0.9

    def test_class_gated(self):
        m = match_detections(DetectionSet((det("a", 1, (0, 0, 10, 10), 0.9),)),
                             GroundTruthSet((gt("a", 2, (0, 0, 10, 10)),)))
        assert m.counts(1) == (0, 1, 0)
        assert m.counts(2) == (0, 0, 1)

    def test_best_iou_chosen(self):
        gts = GroundTruthSet((gt("a", 0, (0, 0, 10, 10)), gt("a", 0, (2, 0, 10, 10))))
        m = match_detections(DetectionSet((det("a", 0, (2, 0, 10, 10), 0.9),)), gts)
        assert m.matched_pairs[0][1].box == BBox(2, 0, 10, 10)

    def test_each_matched_once(self, rng):
        dets = [det(f"i{rng.integers(3)}", 0, tuple(rng.integers(0, 10, 2)) + (8, 8), float(rng.random()))
                for _ in range(40)]
        gts = [gt(f"i{rng.integers(3)}", 0, tuple(rng.integers(0, 10, 2)) + (8, 8)) for _ in range(15)]
        m = match_detections(DetectionSet(tuple(dets)), GroundTruthSet(tuple(gts)))
        assert len({id(p[1]) for p in m.matched_pairs}) == len(m.matched_pairs)
        tp, fp, fn = m.counts(0)
        assert tp + fp == 40 and tp + fn == 15
        random.Random(0).shuffle(dets)
        random.Random(1).shuffle(gts)
        again = match_detections(DetectionSet(tuple(dets)), GroundTruthSet(tuple(gts)))
        assert again.counts(0) == (tp, fp, fn)


class TestPRF1:
    def test_half(self):
        assert prf1_counts(1, 1, 1) == (0.5, 0.5, 0.5)

    def test_vacuous(self):
        assert prf1_counts(0, 0, 0) == (1.0, 1.0, 1.0)

    def test_arithmetic(self):
        p, r, f1 = prf1_counts(3, 1, 2)
        assert (p, r) == (0.75, 0.6)
        assert f1 == pytest.approx(2 * 0.45 / 1.35)
        assert round(f1, 4) == 0.6667

    def test_empty_denominators(self):
        assert prf1_counts(0, 0, 3) == (0.0, 0.0, 0.0)
        assert prf1_counts(0, 2, 0) == (0.0, 0.0, 0.0)

    def test_macro(self):
        m = match_detections(
            DetectionSet((det("a", 0, (0, 0, 10, 10), 0.9), det("a", 1, (50, 50, 5, 5), 0.5))),
            GroundTruthSet((gt("a", 0, (0, 0, 10, 10)), gt("a", 1, (0, 0, 5, 5)))))
        res = prf1(m)
        assert res.per_class[0] == (1.0, 1.0, 1.0)
        assert res.per_class[1] == (0.0, 0.0, 0.0)
        assert res.macro == (0.5, 0.5, 0.5)

    def test_extra_fp_never_raises_precision(self, rng):
        gts = GroundTruthSet(tuple(gt("a", 0, (10 * i, 0, 8, 8)) for i in range(5)))
        dets = [det("a", 0, (10 * i, 0, 8, 8), 0.5 + 0.1 * rng.random()) for i in range(3)]
        before = prf1(match_detections(DetectionSet(tuple(dets)), gts)).per_class[0][0]
        dets.append(det("a", 0, (200, 200, 3, 3), 0.99))
        after = prf1(match_detections(DetectionSet(tuple(dets)), gts)).per_class[0][0]
        assert after <= before


class TestPRCurve:
    def test_single(self):
        c = pr_curve(DetectionSet((det("a", 0, (0, 0, 5, 5), 0.7),)), GroundTruthSet((gt("a", 0, (0, 0, 5, 5)),)), 0)
        assert c.points == ((1.0, 1.0),)
        assert c.ap == 1.0

    def test_no_detections(self):
        assert pr_curve(DetectionSet(), GroundTruthSet((gt("a", 0, (0, 0, 5, 5)),)), 0).ap == 0.0

    def test_worked_example(self):
        gts = GroundTruthSet((gt("a", 0, (0, 0, 5, 5)), gt("b", 0, (0, 0, 5, 5))))
        dets = DetectionSet((det("a", 0, (0, 0, 5, 5), 0.9), det("a", 0, (30, 30, 5, 5), 0.8),
                             det("b", 0, (0, 0, 5, 5), 0.7)))
        c = pr_curve(dets, gts, 0)
        assert c.ap == pytest.approx(0.5 * (1 + 2 / 3))
        assert round(c.ap, 4) == 0.8333
        assert [r for r, _ in c.points] == sorted(r for r, _ in c.points)

    def test_undefined(self):
        with pytest.raises(UndefinedMetricError):
            pr_curve(DetectionSet(), GroundTruthSet((gt("a", 1, (0, 0, 5, 5)),)), 0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.booleans())
    def test_matches_full_resweep(self, seed, with_ties):
        r = random.Random(seed)
        imgs = ["a", "b", "c"]
        gt_list = [(r.choice(imgs), (r.randint(0, 12), r.randint(0, 12), 6, 6)) for _ in range(r.randint(1, 6))]
        grid = [0.2, 0.4, 0.6, 0.8] if with_ties else None
        det_list = []
        for _ in range(r.randint(0, 12)):
            s = r.choice(grid) if grid else round(r.random(), 6)
            det_list.append((r.choice(imgs), s, (r.randint(0, 12), r.randint(0, 12), 6, 6)))
        dets = DetectionSet(tuple(Detection(i, 0, BBox(*b), s) for i, s, b in det_list))
        gts = GroundTruthSet(tuple(GroundTruth(i, 0, BBox(*b)) for i, b in gt_list))
        curve = pr_curve(dets, gts, 0)
        points, ap = pr_sweep_ap(det_list, gt_list)
        assert curve.points == pytest.approx(points)
        assert curve.ap == pytest.approx(ap, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_agrees_with_ranking_ap(self, seed):
        # distinct scores: detection AP = ranking AP of the TP sequence scaled by reachable recall
        r = random.Random(seed)
        gts = GroundTruthSet(tuple(gt("a", 0, (8 * i, 0, 6, 6)) for i in range(r.randint(1, 6))))
        scores = r.sample(range(1, 1000), r.randint(1, 10))
        dets = DetectionSet(tuple(det("a", 0, (8 * r.randint(0, 7), r.choice([0, 3]), 6, 6), s / 1000)
                                  for s in scores))
        curve = pr_curve(dets, gts, 0)
        match = match_detections(dets, gts)
        seq = [(d.score, hit) for d, hit in match.outcomes]
        n_tp = sum(h for _, h in seq)
        if n_tp == 0:
            assert curve.ap == 0.0
            return
        ranking = average_precision([s for s, _ in seq], [int(h) for _, h in seq])
        assert curve.ap == pytest.approx(ranking * n_tp / len(gts), abs=1e-12)


def test_evaluate_utility_conf_threshold():
    gts = GroundTruthSet((gt("a", 0, (0, 0, 5, 5)), gt("a", 1, (20, 20, 5, 5))), ("person", "car"))
    dets = DetectionSet((det("a", 0, (0, 0, 5, 5), 0.9), det("a", 1, (20, 20, 5, 5), 0.1)))
    res = evaluate_utility(dets, gts, 0.5, 0.25)
    assert res.per_class[0]["f1"] == 1.0
    assert res.per_class[1]["recall"] == 0.0  # below conf
    assert res.per_class[1]["pr_auc"] == 1.0  # threshold-free
    assert res.macro["pr_auc"] == 1.0
