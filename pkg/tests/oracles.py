"""Slow, direct reference computations used to check the vectorized code paths.

Everything here is written from the definitions with plain loops and shares
no code with the package.
"""

import math


def gaussian_2d(k):
    sigma = 0.3 * ((k - 1) * 0.5 - 1) + 0.8
    r = (k - 1) // 2
    w = [[math.exp(-((x - r) ** 2 + (y - r) ** 2) / (2 * sigma * sigma)) for x in range(k)] for y in range(k)]
    total = sum(sum(row) for row in w)
    return [[v / total for v in row] for row in w]


def brute_force_ap(scores, labels, ids):
    """Walk every rank cut-off, recount TP directly, and sum recall steps times precision."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], ids[i]))
    n_pos = sum(1 for v in labels if v)
    ap = 0.0
    prev_recall = 0.0
    for cut in range(1, len(order) + 1):
        kept = order[:cut]
        tp = sum(1 for i in kept if labels[i])
        recall = tp / n_pos
        precision = tp / cut
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def box_iou(a, b):
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    ix = max(0.0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    iy = max(0.0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = ix * iy
    return inter / (aw * ah + bw * bh - inter)


def greedy_tp_count(dets, gts, thresh):
    """dets: list of (image, score, box); gts: list of (image, box). Returns (tp, fp)."""
    used = set()
    tp = fp = 0
    for img, _, box in sorted(dets, key=lambda d: (-d[1], d[0], list(d[2]))):
        best, best_v = None, thresh
        for j, (gimg, gbox) in enumerate(gts):
            if gimg != img or j in used:
                continue
            v = box_iou(box, gbox)
            if v >= best_v and (best is None or v > best_v):
                best, best_v = j, v
        if best is None:
            fp += 1
        else:
            used.add(best)
            tp += 1
    return tp, fp


def pr_sweep_ap(dets, gts, thresh=0.5):
    """Re-run matching from scratch at every distinct score threshold."""
    points = []
    for s in sorted({d[1] for d in dets}, reverse=True):
        kept = [d for d in dets if d[1] >= s]
        tp, fp = greedy_tp_count(kept, gts, thresh)
        points.append((tp / len(gts), tp / (tp + fp)))
    ap, prev = 0.0, 0.0
    for r, p in points:
        ap += (r - prev) * p
        prev = r
    return points, ap


def ssim_loops(a, b, size=11, sigma=1.5):
    """Per-pixel SSIM with an explicit edge-replicated Gaussian window, averaged over pixels and channels."""
    c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
    h, w, ch = len(a), len(a[0]), len(a[0][0])
    r = size // 2
    g = [math.exp(-((i - r) ** 2) / (2 * sigma * sigma)) for i in range(size)]
    s = sum(g)
    g = [v / s for v in g]

    def px(img, y, x, c):
        return img[min(max(y, 0), h - 1)][min(max(x, 0), w - 1)][c]

    per_channel = []
    for c in range(ch):
        acc = 0.0
        for y in range(h):
            for x in range(w):
                ma = mb = saa = sbb = sab = 0.0
                for dy in range(size):
                    for dx in range(size):
                        wt = g[dy] * g[dx]
                        va = px(a, y + dy - r, x + dx - r, c)
                        vb = px(b, y + dy - r, x + dx - r, c)
                        ma += wt * va
                        mb += wt * vb
                        saa += wt * va * va
                        sbb += wt * vb * vb
                        sab += wt * va * vb
                va_, vb_, cov = saa - ma * ma, sbb - mb * mb, sab - ma * mb
                acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va_ + vb_ + c2))
        per_channel.append(acc / (h * w))
    return sum(per_channel) / ch


def mmd_loops(x, y, sigma, scale):
    def unit(v):
        n = math.sqrt(sum(t * t for t in v))
        return [t / n for t in v]

    x = [unit(v) for v in x]
    y = [unit(v) for v in y]

    def k(u, v):
        return math.exp(-sum((p - q) ** 2 for p, q in zip(u, v)) / (2 * sigma * sigma))

    kxx = sum(k(u, v) for u in x for v in x) / (len(x) ** 2)
    kyy = sum(k(u, v) for u in y for v in y) / (len(y) ** 2)
    kxy = sum(k(u, v) for u in x for v in y) / (len(x) * len(y))
    return max(0.0, scale * (kxx + kyy - 2 * kxy))
