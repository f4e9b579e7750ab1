"""Exact Shannon measures (bits) over ``JointSource`` values."""
from __future__ import annotations

import math

import numpy as np

from .dist import JointSource, _labels, marginal

NEG_FLOOR = 1e-10


class InconsistencyError(ArithmeticError):
    """An information quantity came out negative beyond numerical noise."""


def entropy_of(p) -> float:
    """-sum p log2 p over a flat or shaped array, 0 log 0 = 0, compensated sum."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return math.fsum((-p * np.log2(p)).tolist())


def _floor(value: float, what: str) -> float:
    if value < 0:
        if value < -NEG_FLOOR:
            raise InconsistencyError(f"{what} = {value:.3e} < 0")
        return 0.0
    return value


def _disjoint(*groups):
    seen = set()
    for g in groups:
        if seen & set(g):
            raise ValueError(f"axis subsets overlap: {groups}")
        seen |= set(g)


def entropy(src: JointSource, axes) -> float:
    axes = _labels(axes)
    if not axes:
        return 0.0
    return entropy_of(marginal(src, axes).pmf)


def cond_entropy(src: JointSource, target, given) -> float:
    target, given = _labels(target), _labels(given)
    _disjoint(target, given)
    if not given:
        return entropy(src, target)
    return _floor(entropy(src, target + given) - entropy(src, given), "H(%s|%s)" % ("".join(target), "".join(given)))


def mutual_info(src: JointSource, a, b) -> float:
    a, b = _labels(a), _labels(b)
    _disjoint(a, b)
    value = entropy(src, a) + entropy(src, b) - entropy(src, a + b)
    return _floor(value, "I(%s;%s)" % ("".join(a), "".join(b)))


def cond_mutual_info(src: JointSource, a, b, given) -> float:
    a, b, given = _labels(a), _labels(b), _labels(given)
    _disjoint(a, b, given)
    if not given:
        return mutual_info(src, a, b)
    value = (
        entropy(src, a + given)
        + entropy(src, b + given)
        - entropy(src, a + b + given)
        - entropy(src, given)
    )
    return _floor(value, "I(%s;%s|%s)" % ("".join(a), "".join(b), "".join(given)))


def info_table(src: JointSource) -> list[tuple[str, float]]:
    """Every H/I term that enters the region bounds and the binning scheme."""
    rows = [(f"H({l})", entropy(src, l)) for l in src.labels]
    has_e = src.has("E")
    rows += [
        ("H(X|Y)", cond_entropy(src, "X", "Y")),
        ("H(Y|Z)", cond_entropy(src, "Y", "Z")),
        ("I(Y;Z)", mutual_info(src, "Y", "Z")),
        ("I(X,Y;Z)", mutual_info(src, "XY", "Z")),
    ]
    if has_e:
        rows += [
            ("H(X|E)", cond_entropy(src, "X", "E")),
            ("H(Y|E)", cond_entropy(src, "Y", "E")),
            ("I(Y;E)", mutual_info(src, "Y", "E")),
            ("H(X|Y,E)", cond_entropy(src, "X", "YE")),
            ("H(X|E)-H(Y|Z)", cond_entropy(src, "X", "E") - cond_entropy(src, "Y", "Z")),
        ]
    return rows
