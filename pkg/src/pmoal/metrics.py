"""Evaluation statistics: weighted f1, win counts, one-sided Welch t-tests."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

WIN_TOL = 1e-9


def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 1e-15) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularised incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x in (0.0, 1.0):
        return x
    ln_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    t2 = t * t
    # for small |t| the argument df/(df+t^2) rounds towards 1; use the complementary form instead
    if t2 < df:
        tail = 0.5 * (1.0 - betainc(0.5, df / 2.0, t2 / (df + t2)))
    else:
        tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t2))
    return tail if t < 0 else 1.0 - tail


def welch_one_sided(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """(t, df, p) for H1: mean(a) < mean(b)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("need at least 2 samples per group")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, float("nan"), 0.5
        t = math.copysign(math.inf, diff)
        return t, float("nan"), t_cdf(t, 1.0)
    t = diff / math.sqrt(se2)
    ra, rb = va / se2, vb / se2  # normalised so tiny variances do not underflow
    df = 1.0 / (ra**2 / (a.size - 1) + rb**2 / (b.size - 1))
    return float(t), float(df), t_cdf(t, df)


def confusion_matrix(pred: Sequence[int], truth: Sequence[int], n_classes: int) -> np.ndarray:
    """Rows are predicted classes, columns true classes (0-based)."""
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (np.asarray(pred, dtype=int), np.asarray(truth, dtype=int)), 1)
    return cm


def per_class_f1(pred: Sequence[int], truth: Sequence[int], n_classes: int) -> np.ndarray:
    cm = confusion_matrix(pred, truth, n_classes)
    tp = np.diag(cm).astype(float)
    predicted, actual = cm.sum(axis=1), cm.sum(axis=0)
    f1 = np.zeros(n_classes)
    for c in range(n_classes):
        p = tp[c] / predicted[c] if predicted[c] else 0.0
        r = tp[c] / actual[c] if actual[c] else 0.0
        f1[c] = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return f1


def weighted_f1(pred: Sequence[int], truth: Sequence[int], n_classes: int) -> float:
    truth = np.asarray(truth, dtype=int)
    if truth.size == 0:
        return 0.0
    support = np.bincount(truth, minlength=n_classes)
    return float(support @ per_class_f1(pred, truth, n_classes) / support.sum())


def win_counts(final_regret: dict[str, dict[int, float]], tol: float = WIN_TOL) -> dict[str, int]:
    """Per agent, the number of shared seeds where it is within tol of the lowest final regret."""
    agents = list(final_regret)
    seeds = set.intersection(*(set(final_regret[a]) for a in agents)) if agents else set()
    wins = {a: 0 for a in agents}
    for s in seeds:
        best = min(final_regret[a][s] for a in agents)
        for a in agents:
            if final_regret[a][s] <= best + tol:
                wins[a] += 1
    return wins
