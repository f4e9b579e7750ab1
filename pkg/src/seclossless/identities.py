"""Exhaustive checks of the multi-letter equivocation identities.

For a joint P(j, x^n, y^n, e^n) with U_i = (X_{i+1}^n, Y^{i-1}, E^{-i}, J):

    H(X^n|E^n,J) - H(Y^n|E^n,J) = sum_i [H(X_i|E_i,U_i) - H(Y_i|E_i,U_i)]

and, with E absent, the same statement without the E terms. Every entropy is
an exact sum over the full tensor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .measures import entropy_of


class GuardExceeded(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MultiLetterJoint:
    """Joint over J, X_1..X_n, Y_1..Y_n, E_1..E_n (tensor axes in that order)."""

    n: int
    pmf: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        if self.pmf.ndim != 1 + 3 * self.n:
            raise ValueError(f"expected {1 + 3 * self.n} axes, got {self.pmf.ndim}")
        _guard(self.pmf.size)
        if abs(float(self.pmf.sum()) - 1.0) > 1e-12 or self.pmf.min() < 0:
            raise ValueError("not a PMF")

    @property
    def j_size(self) -> int:
        return self.pmf.shape[0]

    def x(self, i: int) -> int:
        return 1 + i

    def y(self, i: int) -> int:
        return 1 + self.n + i

    def e(self, i: int) -> int:
        return 1 + 2 * self.n + i

    def H(self, axes) -> float:
        axes = sorted(set(axes))
        if not axes:
            return 0.0
        drop = tuple(a for a in range(self.pmf.ndim) if a not in axes)
        return entropy_of(self.pmf.sum(axis=drop) if drop else self.pmf)

    def cond_H(self, target, given) -> float:
        return self.H(list(target) + list(given)) - self.H(given)


def _guard(states: int):
    limit = DEFAULTS["multiletter_guard"]
    if states > limit:
        raise GuardExceeded(
            f"{states} joint states exceed the guard of {limit}; reduce n or the alphabet sizes"
        )


def random_multiletter(n: int, sizes, seed: int) -> MultiLetterJoint:
    """Flat-Dirichlet PMF over J x X^n x Y^n x E^n; sizes = (j, x, y) or (j, x, y, e)."""
    sizes = tuple(int(s) for s in sizes)
    j, x, y = sizes[:3]
    e = sizes[3] if len(sizes) > 3 else 1
    shape = (j,) + (x,) * n + (y,) * n + (e,) * n
    _guard(int(np.prod(shape)))
    rng = np.random.default_rng(seed)
    pmf = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return MultiLetterJoint(n, pmf)


def _residual(m: MultiLetterJoint, with_e: bool) -> float:
    n = m.n
    e_all = [m.e(i) for i in range(n)] if with_e else []
    xs = [m.x(i) for i in range(n)]
    ys = [m.y(i) for i in range(n)]
    lhs = m.cond_H(xs, [0] + e_all) - m.cond_H(ys, [0] + e_all)
    rhs = 0.0
    for i in range(n):
        # (E_i, U_i) = (J, X_{i+1}^n, Y^{i-1}, E^n)
        cond = [0] + xs[i + 1:] + ys[:i] + e_all
        rhs += m.cond_H([xs[i]], cond) - m.cond_H([ys[i]], cond)
    return abs(lhs - rhs)


def identity3_residual(m: MultiLetterJoint) -> float:
    if any(m.pmf.shape[m.e(i)] != 1 for i in range(m.n)):
        raise ValueError("identity without eavesdropper needs |E| = 1")
    return _residual(m, with_e=False)


def lemma1_residual(m: MultiLetterJoint) -> float:
    return _residual(m, with_e=True)
