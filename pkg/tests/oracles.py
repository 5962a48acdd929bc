"""Independent brute-force oracles used to check the fast implementations.

Everything here is deliberately naive: plain Python loops over pairs,
ranks and contingency cells, and central finite differences for
gradients. None of it shares code with the package.
"""
from __future__ import annotations

import math

import numpy as np


def auc_roc_bruteforce(scores, labels) -> float:
    scores = list(map(float, scores))
    labels = list(map(int, labels))
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def auc_pr_bruteforce(scores, labels) -> float:
    # walk ranks in descending score order, stable on ties
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    seen = 0
    hits = 0
    precision_sum = 0.0
    for idx in order:
        seen += 1
        if labels[idx] == 1:
            hits += 1
            precision_sum += hits / seen
    return precision_sum / hits


def contingency(a, b):
    table = {}
    for x, y in zip(a, b):
        table[(x, y)] = table.get((x, y), 0) + 1
    return table


def nmi_bruteforce(a, b) -> float:
    n = len(a)
    table = contingency(a, b)
    row, col = {}, {}
    for (x, y), c in table.items():
        row[x] = row.get(x, 0) + c
        col[y] = col.get(y, 0) + c
    h_a = -sum(c / n * math.log(c / n) for c in row.values())
    h_b = -sum(c / n * math.log(c / n) for c in col.values())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    mi = sum(
        c / n * math.log(n * c / (row[x] * col[y])) for (x, y), c in table.items()
    )
    return min(1.0, max(0.0, mi / math.sqrt(h_a * h_b)))


def pairwise_f_bruteforce(a, b) -> float:
    n = len(a)
    tp = pred = true = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = a[i] == a[j]
            same_b = b[i] == b[j]
            true += same_a
            pred += same_b
            tp += same_a and same_b
    if true == 0 and pred == 0:
        return 1.0
    precision = tp / pred if pred else 0.0
    recall = tp / true if true else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def roc_trapezoid(scores, labels) -> float:
    """Area under the ROC curve by trapezoidal integration over thresholds."""
    thresholds = sorted(set(scores), reverse=True)
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    points = [(0.0, 0.0)]
    for t in thresholds:
        tp = sum(1 for s, l in zip(scores, labels) if s >= t and l == 1)
        fp = sum(1 for s, l in zip(scores, labels) if s >= t and l == 0)
        points.append((fp / n_neg, tp / n_pos))
    points.append((1.0, 1.0))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def flatten_params(model) -> np.ndarray:
    parts = [model.w.ravel(), model.b.ravel()]
    if model.decoder_w is not None:
        parts += [model.decoder_w.ravel(), model.decoder_b.ravel()]
    return np.concatenate([p.copy() for p in parts])


def set_params(model, theta: np.ndarray) -> None:
    pos = 0
    for name in ("w", "b", "decoder_w", "decoder_b"):
        a = getattr(model, name)
        if a is None:
            continue
        setattr(model, name, theta[pos : pos + a.size].reshape(a.shape).copy())
        pos += a.size


def fd_gradient(objective, model, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of `objective(model)` over all parameters."""
    theta = flatten_params(model)
    grad = np.empty_like(theta)
    for p in range(theta.size):
        up = theta.copy()
        up[p] += h
        set_params(model, up)
        f_up = objective(model)
        down = theta.copy()
        down[p] -= h
        set_params(model, down)
        f_down = objective(model)
        grad[p] = (f_up - f_down) / (2.0 * h)
    set_params(model, theta)
    return grad
