"""Constrained upper concave envelopes over a probability simplex.

An auxiliary-variable optimization of the form

    max  sum_g w_g f(q_g)   s.t.  sum_g w_g q_g = p,  w >= 0,
         sum_g w_g c_j(q_g) <= b_j

is a linear program once the candidate posteriors ``q_g`` are fixed. The
candidate set starts as a lattice on the simplex face spanned by ``p``'s
support and is then refined by column generation: neighbours of the active
atoms are priced with the LP duals and added while some have positive
reduced cost, halving the step when none do.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from .defaults import DEFAULTS

# scores map an (m, k) matrix of atoms to m values
Score = Callable[[np.ndarray], np.ndarray]

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass
class EnvelopeProblem:
    base: np.ndarray
    atoms: np.ndarray
    objective: Score
    constraints: list[tuple[Score, float]] = field(default_factory=list)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if self.atoms.shape[1] != self.base.size:
            raise ValueError("atoms and base live on different simplices")
        if len(self.atoms) == 0:
            raise ValueError("empty atom grid")


@dataclass
class EnvelopeSolution:
    feasible: bool
    value: float | None
    weights: dict[int, float]
    atoms: np.ndarray
    lp_solves: int = 0

    @property
    def support(self) -> np.ndarray:
        return self.atoms[sorted(self.weights)]

    @property
    def support_weights(self) -> np.ndarray:
        return np.array([self.weights[i] for i in sorted(self.weights)])


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in (1/resolution) Z, lexicographic."""
    if k == 1:
        return np.ones((1, 1))
    pts = []
    n = resolution
    for bars in combinations(range(n + k - 1), k - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n + k - 2 - prev)
        pts.append(counts)
    return np.asarray(pts, dtype=float) / n


def posterior_grid(base, resolution: int) -> np.ndarray:
    """Lattice atoms on the face of ``base``'s support, plus ``base`` itself."""
    base = np.asarray(base, dtype=float)
    support = np.flatnonzero(base > 0)
    face = simplex_grid(len(support), resolution)
    atoms = np.zeros((len(face) + 1, base.size))
    atoms[:-1, support] = face
    atoms[-1] = base
    return atoms


def default_resolution(k: int) -> int:
    if k <= 3:
        return DEFAULTS["grid_resolution_small"]
    if k == 4:
        return DEFAULTS["grid_resolution_4"]
    return DEFAULTS["grid_resolution_large"]


def _solve_lp(p: EnvelopeProblem, atoms: np.ndarray):
    c = -np.asarray(p.objective(atoms), dtype=float)
    a_ub = b_ub = None
    if p.constraints:
        a_ub = np.vstack([np.asarray(fn(atoms), dtype=float) for fn, _ in p.constraints])
        b_ub = np.array([b for _, b in p.constraints], dtype=float)
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=atoms.T,
        b_eq=p.base,
        bounds=(0, None),
        method="highs-ds",
        options=_LP_OPTIONS,
    )
    return res


def _reduced_gain(p: EnvelopeProblem, res, cand: np.ndarray) -> np.ndarray:
    gain = np.asarray(p.objective(cand), dtype=float) + cand @ res.eqlin.marginals
    for (fn, _), y in zip(p.constraints, res.ineqlin.marginals if p.constraints else []):
        gain = gain + y * np.asarray(fn(cand), dtype=float)
    return gain


def _neighbours(atoms: np.ndarray, support: np.ndarray, step: float) -> np.ndarray:
    out = []
    for q in atoms:
        for i in support:
            for j in support:
                if i == j or q[j] <= 0:
                    continue
                moved = q.copy()
                s = min(step, q[j])
                moved[i] += s
                moved[j] -= s
                if s < q[j]:
                    out.append(moved)
                else:
                    moved[j] = 0.0
                    out.append(moved)
    return np.asarray(out) if out else np.zeros((0, atoms.shape[1]))


def solve_envelope(
    problem: EnvelopeProblem,
    refine: bool = True,
    start_step: float | None = None,
    min_step: float | None = None,
    max_lp: int | None = None,
) -> EnvelopeSolution:
    """Maximize the weighted atom score subject to the barycenter and side constraints."""
    atoms = problem.atoms
    res = _solve_lp(problem, atoms)
    solves = 1
    if res.status == 2:
        return EnvelopeSolution(False, None, {}, atoms, solves)
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")

    if refine:
        support = np.flatnonzero(problem.base > 0)
        step = DEFAULTS["refine_start_step"] if start_step is None else start_step
        min_step = DEFAULTS["refine_min_step"] if min_step is None else min_step
        max_lp = DEFAULTS["refine_max_lp"] if max_lp is None else max_lp
        tol = DEFAULTS["refine_gain_tol"]
        while step >= min_step and solves < max_lp:
            active = atoms[res.x > 0]
            cand = _neighbours(active, support, step)
            if len(cand):
                gain = _reduced_gain(problem, res, cand)
                keep = gain > tol
            else:
                keep = np.zeros(0, bool)
            if not np.any(keep):
                step *= 0.5
                continue
            trial_atoms = np.vstack([atoms, cand[keep]])
            trial = _solve_lp(problem, trial_atoms)
            solves += 1
            if trial.status != 0 or -trial.fun <= -res.fun + tol:
                step *= 0.5
                if trial.status == 0 and -trial.fun >= -res.fun:
                    atoms, res = trial_atoms, trial
                continue
            atoms, res = trial_atoms, trial

    w = res.x
    cut = DEFAULTS["weight_cutoff"]
    weights = {int(i): float(w[i]) for i in np.flatnonzero(w > cut)}
    return EnvelopeSolution(True, float(-res.fun), weights, atoms, solves)

