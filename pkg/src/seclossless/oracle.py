"""Random-restart optimizer over raw auxiliary channels.

Shares no code with the lattice LP: the channel P(u|parents) is a row-wise
softmax of free logits, the objective is evaluated from the full joint
P(x,y,z,e,u) with plain numpy, and each restart runs L-BFGS from a seeded
random start using the analytic gradient.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .defaults import DEFAULTS

_AX = {"X": 0, "Y": 1, "Z": 2, "E": 3, "U": 4}
_LN2 = np.log(2.0)

# objective = sum of coef * H(axes)
_TERMS = {
    # H(X|U) - H(Y|U)
    "THM1": [(1, "XU"), (-1, "YU")],
    "COR1": [(1, "XU"), (-1, "YU")],
    # -I(XY;E|U) + H(X|EU) - H(Y|EU)
    "THM2": [(-1, "XYU"), (-1, "EU"), (1, "XYEU"), (1, "U"), (1, "XEU"), (-1, "YEU")],
    # I(Y;Z|U) - I(Y;E|U) + H(X|EU) - H(Y|EU)
    "THM3": [(1, "ZU"), (-1, "YZU"), (1, "XEU"), (-1, "EU")],
}
_PARENTS = {"THM1": (0, 1), "THM2": (0, 1), "COR1": (1,), "THM3": (1,)}


def _H(m: np.ndarray) -> float:
    p = m[m > 0]
    return float(-(p * np.log2(p)).sum())


def _value_and_grad_joint(joint: np.ndarray, terms):
    """Objective and d objective / d joint."""
    val = 0.0
    grad = np.zeros_like(joint)
    for coef, axes in terms:
        keep = [_AX[a] for a in axes]
        drop = tuple(i for i in range(5) if i not in keep)
        m = joint.sum(axis=drop, keepdims=True)
        val += coef * _H(m)
        grad += coef * (-(np.log2(np.maximum(m, 1e-300)) + 1 / _LN2))
    return val, grad


def _channel(theta: np.ndarray) -> np.ndarray:
    t = theta - theta.max(axis=1, keepdims=True)
    w = np.exp(t)
    return w / w.sum(axis=1, keepdims=True)


def random_restart_u(
    pxyze: np.ndarray, mode: str, restarts: int | None = None, seed: int = 0, u_size: int | None = None
) -> tuple[float, np.ndarray]:
    """Best U-part value over ``restarts`` local searches; returns (value, channel rows).

    ``pxyze`` is the joint as a dense (X, Y, Z, E) array (E of size 1 when absent).
    The channel is returned with shape (*parent sizes, |U|).
    """
    mode = str(getattr(mode, "value", mode))
    terms = _TERMS[mode]
    parents = _PARENTS[mode]
    p = np.asarray(pxyze, dtype=float)
    psizes = [p.shape[i] for i in parents]
    n_par = int(np.prod(psizes))
    if u_size is None:
        u_size = n_par + 1
    restarts = DEFAULTS["oracle_restarts"] if restarts is None else restarts
    # view of the source with parent axes flattened: channel index -> joint broadcast
    shape = [1] * 5
    for i in parents:
        shape[i] = p.shape[i]
    shape[4] = u_size
    other = tuple(i for i in range(4) if i not in parents)

    def f(theta_flat):
        w = _channel(theta_flat.reshape(n_par, u_size))
        kernel = w.reshape(shape)
        joint = p[..., None] * kernel
        val, gj = _value_and_grad_joint(joint, terms)
        # d/d w[parent, u] = sum over non-parent axes of p * gj
        gw = (p[..., None] * gj).sum(axis=other, keepdims=True).reshape(n_par, u_size)
        # softmax chain rule, row-wise
        gt = w * (gw - (gw * w).sum(axis=1, keepdims=True))
        return -val, -gt.ravel()

    rng = np.random.default_rng(seed)
    best_val, best_w = -np.inf, None
    for _ in range(restarts):
        scale = rng.choice([0.5, 2.0, 6.0])
        x0 = rng.normal(scale=scale, size=n_par * u_size)
        res = minimize(f, x0, jac=True, method="L-BFGS-B", options={"maxiter": 500, "gtol": 1e-10})
        if -res.fun > best_val:
            best_val = -res.fun
            best_w = _channel(res.x.reshape(n_par, u_size))
    return float(best_val), best_w.reshape(psizes + [u_size])


def dense_xyze(src) -> np.ndarray:
    """Dense (X, Y, Z, E) array from a JointSource, inserting a size-1 E if absent."""
    p = np.asarray(src.pmf, dtype=float)
    labels = src.labels
    for i, l in enumerate("XYZE"):
        if l not in labels:
            p = np.expand_dims(p, i)
            labels = labels[:i] + (l,) + labels[i:]
    return p
