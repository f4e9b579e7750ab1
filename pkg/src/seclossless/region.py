"""Rate-equivocation regions of secure lossless source coding.

Each bound splits into a V-part (a coded description of Z for Bob) and a
U-part (a function of Alice's observation). Both are expectations of a fixed
per-posterior score under a barycenter constraint, so each is a constrained
concave envelope solved by :mod:`seclossless.envelope`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .defaults import DEFAULTS
from .dist import Alphabet, Channel, JointSource, attach_aux, condition, marginal, markov_residual
from .envelope import EnvelopeProblem, default_resolution, posterior_grid, solve_envelope
from .measures import cond_entropy, cond_mutual_info, entropy, mutual_info
from .parallel import pmap

MARKOV_TOL = 1e-9


class Mode(str, enum.Enum):
    THM1 = "THM1"  # coded side information, Alice sees (X, Y)
    COR1 = "COR1"  # as THM1 but Alice sees only Y
    THM2 = "THM2"  # eavesdropper with side information E
    THM3 = "THM3"  # achievable: uncoded side information at Bob, Alice sees Y
    SW_BASELINE = "SW_BASELINE"


U_PARENTS = {
    Mode.THM1: ("X", "Y"),
    Mode.THM2: ("X", "Y"),
    Mode.COR1: ("Y",),
    Mode.THM3: ("Y",),
}


class InfeasibleBudget(ValueError):
    pass


class StructureError(ValueError):
    pass


@dataclass
class RegionPoint:
    r_a: float
    r_c: float
    delta_raw: float | None
    delta: float | None
    mode: Mode
    feasible: bool = True
    u_value: float | None = None
    v_value: float | None = None
    h_y_given_v: float | None = None
    i_z_v: float | None = None
    u_channel: Channel | None = None
    v_channel: Channel | None = None


class SWEquivocation(NamedTuple):
    raw: float
    clamped: float


def _rowH(a: np.ndarray) -> np.ndarray:
    """Row entropies of an (m, ...) array; a one-symbol distribution has entropy 0."""
    a = a.reshape(a.shape[0], -1)
    if a.shape[1] == 1:
        return np.zeros(a.shape[0])
    safe = np.where(a > 0, a, 1.0)
    return -np.sum(np.where(a > 0, a * np.log2(safe), 0.0), axis=1)


def _others(src: JointSource, exclude) -> tuple[str, ...]:
    return tuple(l for l in src.labels if l not in exclude and l in "XYZE")


def _check_markov(src: JointSource, aux: str, parents, what: str):
    rest = _others(src, tuple(parents) + (aux,))
    if rest and markov_residual(src, aux, rest, parents) > MARKOV_TOL:
        raise StructureError(f"{aux} is not conditionally independent of {rest} given {parents} ({what})")


def _e_axis(src: JointSource) -> tuple[str, ...]:
    return ("E",) if src.has("E") else ()


def u_gain(src: JointSource, mode: Mode) -> float:
    """U-dependent part of the equivocation bound for ``mode``."""
    mode = Mode(mode)
    if not src.has("U"):
        raise StructureError("source has no U axis")
    if mode not in U_PARENTS:
        raise StructureError(f"mode {mode.value} has no U part")
    _check_markov(src, "U", U_PARENTS[mode], mode.value)
    e = _e_axis(src)
    if mode in (Mode.THM1, Mode.COR1):
        return cond_entropy(src, "X", "U") - cond_entropy(src, "Y", "U")
    hx = cond_entropy(src, "X", e + ("U",))
    hy = cond_entropy(src, "Y", e + ("U",))
    if mode is Mode.THM2:
        leak = cond_mutual_info(src, "XY", e, "U") if e else 0.0
        return hx - hy - leak
    z_gain = cond_mutual_info(src, "Y", "Z", "U")
    e_leak = cond_mutual_info(src, "Y", e, "U") if e else 0.0
    return z_gain - e_leak + hx - hy


def v_tradeoff(src: JointSource) -> tuple[float, float, float]:
    """(H(Y|V), I(Z;V), I(X,Y;V)) for a source carrying V drawn from Z."""
    if not src.has("V"):
        raise StructureError("source has no V axis")
    _check_markov(src, "V", ("Z",), "V from Z")
    return (
        cond_entropy(src, "Y", "V"),
        mutual_info(src, "Z", "V"),
        mutual_info(src, "XY", "V"),
    )


def sw_equivocation(src: JointSource) -> SWEquivocation:
    """Equivocation of plain Slepian-Wolf binning, H(X|E) - H(Y|Z)."""
    raw = cond_entropy(src, "X", _e_axis(src)) - cond_entropy(src, "Y", "Z")
    return SWEquivocation(raw, max(0.0, raw))


# per-posterior scores -------------------------------------------------------

def _xy_cond(src: JointSource, target: str) -> np.ndarray:
    """P(target | x, y) as an array (X, Y, target), zero rows where undefined."""
    return condition(src, target, "XY").filled()


def _given_y(src: JointSource, targets: str) -> np.ndarray:
    """P(targets | y) with shape (Y, *targets)."""
    joint = marginal(src, "Y" + targets).pmf
    # marginal keeps canonical order; move Y first
    labels = [l for l in "XYZE" if l in "Y" + targets]
    joint = np.moveaxis(joint, labels.index("Y"), 0)
    py = joint.reshape(joint.shape[0], -1).sum(axis=1)
    out = np.zeros_like(joint)
    nz = py > 0
    out[nz] = joint[nz] / py[nz].reshape((-1,) + (1,) * (joint.ndim - 1))
    return out


def _u_problem(src: JointSource, mode: Mode):
    e = _e_axis(src)
    if mode in (Mode.THM1, Mode.THM2):
        pxy = marginal(src, "XY").pmf
        nx, ny = pxy.shape
        base = pxy.ravel()
        if mode is Mode.THM1 or not e:

            def score(q):
                q = q.reshape(-1, nx, ny)
                return _rowH(q.sum(axis=2)) - _rowH(q.sum(axis=1))

        else:
            pe = _xy_cond(src, "E")

            def score(q):
                q = q.reshape(-1, nx, ny)
                j = q[:, :, :, None] * pe[None]
                h_xe = _rowH(j.sum(axis=2))
                h_ye = _rowH(j.sum(axis=1))
                h_e = _rowH(j.sum(axis=(1, 2)))
                leak = _rowH(q) + h_e - _rowH(j)
                return (h_xe - h_ye) - leak

        return base, score

    py = marginal(src, "Y").pmf
    if mode is Mode.COR1:
        px = _given_y(src, "X")

        def score(q):
            return _rowH(q @ px) - _rowH(q)

        return py, score

    if mode is Mode.THM3:
        kern = _given_y(src, "XZ" + "".join(e))
        if not e:
            kern = kern[..., None]
        _, nx, nz, ne = kern.shape

        def score(q):
            j = np.einsum("my,yxze->myxze", q, kern)
            h_y = _rowH(q)
            h_z = _rowH(j.sum(axis=(1, 2, 4)))
            h_yz = _rowH(j.sum(axis=(2, 4)))
            h_e = _rowH(j.sum(axis=(1, 2, 3)))
            h_ye = _rowH(j.sum(axis=(2, 3)))
            h_xe = _rowH(j.sum(axis=(1, 3)))
            return (h_y + h_z - h_yz) - (h_y + h_e - h_ye) + (h_xe - h_e) - (h_ye - h_e)

        return py, score

    raise StructureError(f"mode {mode.value} has no U part")


def _witness(src: JointSource, parents: tuple[str, ...], base, sol, name: str) -> Channel:
    atoms = sol.support
    w = sol.support_weights
    joint = atoms * w[:, None]  # (u, s)
    shape = tuple(src.size(p) for p in parents)
    rows = np.full((base.size, len(w)), np.nan)
    nz = base > 0
    rows[nz] = (joint[:, nz] / joint[:, nz].sum(axis=0)).T
    return Channel(tuple(src.alphabet(p) for p in parents), Alphabet(name, len(w)), rows.reshape(shape + (len(w),)))


def optimize_u(
    src: JointSource, mode: Mode, grid_resolution: int | None = None, refine: bool = True
) -> tuple[float, Channel]:
    """Maximize the U-part of the bound; returns the value and a witness P(u|parents)."""
    mode = Mode(mode)
    base, score = _u_problem(src, mode)
    res = grid_resolution or default_resolution(int(np.count_nonzero(base)))
    problem = EnvelopeProblem(base, posterior_grid(base, res), score)
    sol = solve_envelope(problem, refine=refine)
    parents = U_PARENTS[mode]
    witness = _witness(src, parents, base, sol, "U")
    value = u_gain(attach_aux(src, witness, "U", parents=parents), mode)
    return value, witness


def _v_problem(src: JointSource, r_c_budget: float, r_a_budget: float | None, target: str):
    pz = marginal(src, "Z").pmf
    slack = DEFAULTS["budget_slack"]
    p_t = _zcond(src, target)
    p_y = _zcond(src, "Y")
    h_z = entropy(src, "Z")

    def objective(q):
        return -_rowH(q @ p_t)

    constraints = [(lambda q: h_z - _rowH(q), r_c_budget + slack)]
    if r_a_budget is not None:
        constraints.append((lambda q: _rowH(q @ p_y), r_a_budget + slack))
    return pz, objective, constraints


def _zcond(src: JointSource, target: str) -> np.ndarray:
    """P(target | z) flattened to (Z, |target|)."""
    labels = [l for l in "XYZ" if l in target + "Z"]
    joint = marginal(src, "".join(labels)).pmf
    joint = np.moveaxis(joint, labels.index("Z"), 0).reshape(src.size("Z"), -1)
    pz = joint.sum(axis=1, keepdims=True)
    return np.divide(joint, pz, out=np.zeros_like(joint), where=pz > 0)


def optimize_v(
    src: JointSource,
    r_c_budget: float,
    r_a_budget: float | None = None,
    grid_resolution: int | None = None,
    target: str = "XY",
    refine: bool = True,
) -> tuple[float, Channel]:
    """Maximize I(target;V) over P(v|z) with I(Z;V) <= r_c and H(Y|V) <= r_a.

    Raises InfeasibleBudget when r_a is below H(Y|Z).
    """
    if r_c_budget < 0 or (r_a_budget is not None and r_a_budget < 0):
        raise ValueError("budgets must be non-negative")
    base, objective, constraints = _v_problem(src, r_c_budget, r_a_budget, target)
    res = grid_resolution or default_resolution(int(np.count_nonzero(base)))
    problem = EnvelopeProblem(base, posterior_grid(base, res), objective, constraints)
    sol = solve_envelope(problem, refine=refine)
    if not sol.feasible:
        raise InfeasibleBudget(f"R_A budget {r_a_budget} below H(Y|Z) = {cond_entropy(src, 'Y', 'Z'):.9g}")
    witness = _witness(src, ("Z",), base, sol, "V")
    with_v = attach_aux(src, witness, "V")
    value = mutual_info(with_v, target, "V")
    return value, witness


def _v_task(args):
    src, r_a, r_c, res, target, refine = args
    try:
        value, ch = optimize_v(src, r_c, r_a, res, target, refine)
    except InfeasibleBudget:
        return None
    h_y_v, i_z_v, _ = v_tradeoff(attach_aux(src, ch, "V"))
    return value, ch, h_y_v, i_z_v


def _clamp(delta: float, h_x: float) -> float:
    return min(max(delta, 0.0), h_x)


def region_frontier(
    src: JointSource,
    mode: Mode,
    budget_grid,
    grid_resolution: int | None = None,
    refine: bool = True,
    jobs: int | None = 1,
) -> list[RegionPoint]:
    """Equivocation bound at each (r_a, r_c) budget pair.

    For THM1/COR1/THM2 the bound is the best V-part under the budgets plus the
    unconstrained U-part. A V witness found at smaller budgets stays feasible
    at larger ones, so each point takes the best witness among the points it
    dominates; this makes the frontier monotone in both budgets.
    For THM3 and SW_BASELINE r_c is pinned to H(Z) and only r_a >= H(Y|Z) matters.
    """
    mode = Mode(mode)
    budgets = [(float(a), float(c)) for a, c in budget_grid]
    h_x = entropy(src, "X")
    h_y_z = cond_entropy(src, "Y", "Z")
    slack = DEFAULTS["budget_slack"]

    if mode in (Mode.THM3, Mode.SW_BASELINE):
        h_z = entropy(src, "Z")
        if mode is Mode.THM3:
            u_val, u_ch = optimize_u(src, mode, grid_resolution, refine)
        else:
            u_val, u_ch = sw_equivocation(src).raw, None
        points = []
        for r_a, _ in budgets:
            if r_a + slack < h_y_z:
                points.append(RegionPoint(r_a, h_z, None, None, mode, feasible=False))
            else:
                points.append(RegionPoint(r_a, h_z, u_val, _clamp(u_val, h_x), mode, u_value=u_val, u_channel=u_ch))
        return points

    u_val, u_ch = optimize_u(src, mode, grid_resolution, refine)
    target = "Y" if mode is Mode.COR1 else "XY"
    tasks = [(src, r_a, r_c, grid_resolution, target, refine) for r_a, r_c in budgets]
    v_results = pmap(_v_task, tasks, jobs)

    points = []
    for i, (r_a, r_c) in enumerate(budgets):
        best = None
        for j, (a2, c2) in enumerate(budgets):
            if a2 <= r_a and c2 <= r_c and v_results[j] is not None:
                if best is None or v_results[j][0] > best[0]:
                    best = v_results[j]
        if best is None:
            points.append(RegionPoint(r_a, r_c, None, None, mode, feasible=False, u_value=u_val))
            continue
        v_val, v_ch, h_y_v, i_z_v = best
        raw = v_val + u_val
        points.append(
            RegionPoint(
                r_a, r_c, raw, _clamp(raw, h_x), mode,
                u_value=u_val, v_value=v_val, h_y_given_v=h_y_v, i_z_v=i_z_v,
                u_channel=u_ch, v_channel=v_ch,
            )
        )
    return points


def budget_grid(ra_values, rc_values) -> list[tuple[float, float]]:
    """Cartesian product, r_a major, both sorted ascending."""
    return [(float(a), float(c)) for a in sorted(ra_values) for c in sorted(rc_values)]

