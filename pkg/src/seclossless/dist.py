"""Finite joint distributions and conditional channels.

Every tensor uses the canonical axis order X, Y, Z, E, U, V (then J) and is
stored row-major. Values are immutable once constructed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CANONICAL = ("X", "Y", "Z", "E", "U", "V", "J")
SUM_TOL = 1e-12


class InvalidDistribution(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int

    def __post_init__(self):
        if self.name not in CANONICAL:
            raise ValueError(f"unknown axis label {self.name!r}")
        if int(self.size) < 1:
            raise ValueError(f"alphabet {self.name} must have size >= 1, got {self.size}")


@dataclass(frozen=True)
class Violation:
    kind: str
    index: tuple | None
    magnitude: float

    def __str__(self):
        where = "" if self.index is None else f" at {self.index}"
        return f"{self.kind} violation{where} (magnitude {self.magnitude:.3g})"


def validate(pmf, shape: Sequence[int] | None = None, tol: float = SUM_TOL) -> Violation | None:
    """Return None for a valid PMF, otherwise the first violated constraint."""
    p = np.asarray(pmf, dtype=float)
    if shape is not None and tuple(p.shape) != tuple(shape):
        return Violation("shape", tuple(p.shape), float("nan"))
    if not np.all(np.isfinite(p)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(p))[0])
        return Violation("nonfinite", idx, float("nan"))
    if p.size and p.min() < 0:
        idx = tuple(int(i) for i in np.argwhere(p < 0)[0])
        return Violation("negativity", idx, float(p[idx]))
    total = float(np.sum(p))
    if abs(total - 1.0) > tol:
        return Violation("sum", None, total - 1.0)
    return None


def _labels(axes) -> tuple[str, ...]:
    if isinstance(axes, str):
        axes = tuple(axes)
    out = tuple(axes)
    for a in out:
        if a not in CANONICAL:
            raise KeyError(f"unknown axis label {a!r}")
    return out


@dataclass(frozen=True, eq=False)
class JointSource:
    axes: tuple[Alphabet, ...]
    pmf: np.ndarray
    markov_e: bool = field(default=False, compare=False)

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise InvalidDistribution(f"duplicate axes {names}")
        order = [CANONICAL.index(n) for n in names]
        if order != sorted(order):
            raise InvalidDistribution(f"axes {names} not in canonical order")
        pmf = np.array(self.pmf, dtype=float)
        v = validate(pmf, [a.size for a in self.axes])
        if v is not None:
            raise InvalidDistribution(str(v))
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"source has no axis {label!r}; axes are {self.labels}") from None

    def alphabet(self, label: str) -> Alphabet:
        return self.axes[self.axis(label)]

    def size(self, label: str) -> int:
        return self.alphabet(label).size

    def has(self, label: str) -> bool:
        return label in self.labels

    def __repr__(self):
        dims = "x".join(f"{a.name}{a.size}" for a in self.axes)
        return f"JointSource({dims})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional PMF of ``to_axis`` given ``from_axes``.

    ``rows`` has shape ``(*from sizes, to size)``. Rows whose conditioning
    tuple has zero probability are NaN (undefined) and carry no weight.
    """

    from_axes: tuple[Alphabet, ...]
    to_axis: Alphabet
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        shape = tuple(a.size for a in self.from_axes) + (self.to_axis.size,)
        if rows.shape != shape:
            raise InvalidDistribution(f"channel rows have shape {rows.shape}, expected {shape}")
        flat = rows.reshape(-1, self.to_axis.size)
        for i, row in enumerate(flat):
            if np.all(np.isnan(row)):
                continue
            v = validate(row)
            if v is not None:
                idx = np.unravel_index(i, shape[:-1])
                raise InvalidDistribution(f"row {tuple(int(j) for j in idx)}: {v}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def from_labels(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.from_axes)

    @property
    def defined(self) -> np.ndarray:
        return ~np.all(np.isnan(self.rows), axis=-1)

    def filled(self) -> np.ndarray:
        """Rows with undefined entries replaced by zeros."""
        return np.nan_to_num(self.rows, nan=0.0)


def make_source(sizes: dict[str, int], pmf) -> JointSource:
    labels = [l for l in CANONICAL if l in sizes]
    axes = tuple(Alphabet(l, int(sizes[l])) for l in labels)
    p = np.asarray(pmf, dtype=float).reshape([a.size for a in axes])
    return JointSource(axes, p)


def make_channel(from_sizes: dict[str, int], to: tuple[str, int], rows) -> Channel:
    from_axes = tuple(Alphabet(l, int(s)) for l, s in from_sizes.items())
    r = np.asarray(rows, dtype=float).reshape([a.size for a in from_axes] + [int(to[1])])
    return Channel(from_axes, Alphabet(to[0], int(to[1])), r)


def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


def source_from_y(py, x_given_y, z_given_y, e_given_y=None) -> JointSource:
    """P(x,y,z,e) = P(y) P(x|y) P(z|y) P(e|y), matrices indexed [y, symbol]."""
    py = np.asarray(py, float)
    xy = np.asarray(x_given_y, float)
    zy = np.asarray(z_given_y, float)
    ey = np.ones((len(py), 1)) if e_given_y is None else np.asarray(e_given_y, float)
    pmf = np.einsum("y,yx,yz,ye->xyze", py, xy, zy, ey)
    src = make_source({"X": xy.shape[1], "Y": len(py), "Z": zy.shape[1], "E": ey.shape[1]}, pmf)
    return JointSource(src.axes, src.pmf, markov_e=True)


def marginal(src: JointSource, keep) -> JointSource:
    keep = _labels(keep)
    if not keep:
        raise ValueError("marginal needs at least one axis")
    for k in keep:
        src.axis(k)
    drop = tuple(i for i, l in enumerate(src.labels) if l not in keep)
    axes = tuple(a for a in src.axes if a.name in keep)
    return JointSource(axes, src.pmf.sum(axis=drop) if drop else src.pmf)


def _aligned(src: JointSource, labels: tuple[str, ...]) -> np.ndarray:
    """Marginal over ``labels`` with axes permuted into exactly that order."""
    m = marginal(src, labels)
    perm = [m.labels.index(l) for l in labels]
    return np.transpose(m.pmf, perm)


def condition(src: JointSource, target: str, given) -> Channel:
    given = _labels(given)
    if target in given:
        raise ValueError("target cannot also be conditioned on")
    joint = _aligned(src, given + (target,))
    norm = joint.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(norm > 0, joint / np.where(norm > 0, norm, 1.0), np.nan)
    return Channel(tuple(src.alphabet(g) for g in given), src.alphabet(target), rows)


def compose_markov(pxyz: JointSource, e_given_y: Channel) -> JointSource:
    if pxyz.labels != ("X", "Y", "Z"):
        raise InvalidDistribution(f"compose_markov needs an X,Y,Z source, got {pxyz.labels}")
    if e_given_y.from_labels != ("Y",) or e_given_y.to_axis.name != "E":
        raise InvalidDistribution("e_given_y must be a channel from Y to E")
    if e_given_y.from_axes[0].size != pxyz.size("Y"):
        raise InvalidDistribution(
            f"alphabet mismatch: Y has {pxyz.size('Y')} symbols, channel has {e_given_y.from_axes[0].size}"
        )
    pmf = pxyz.pmf[:, :, :, None] * e_given_y.filled()[None, :, None, :]
    return JointSource(pxyz.axes + (e_given_y.to_axis,), pmf, markov_e=True)


_AUX_PARENTS = {"U": {"X", "Y"}, "V": {"Z"}}


def attach_aux(src: JointSource, aux: Channel, aux_axis: str, parents=None) -> JointSource:
    """Extend ``src`` by ``aux_axis`` drawn through ``aux`` from its parent axes.

    ``parents`` optionally narrows the admissible parent set (e.g. ``{"Y"}``
    when Alice does not see X).
    """
    if aux_axis not in _AUX_PARENTS:
        raise ValueError(f"aux axis must be U or V, got {aux_axis!r}")
    allowed = set(parents) if parents is not None else _AUX_PARENTS[aux_axis]
    frm = aux.from_labels
    if not frm or not set(frm) <= allowed or (aux_axis == "V" and set(frm) != {"Z"}):
        raise InvalidDistribution(f"{aux_axis} may not be conditioned on {frm} (allowed: {sorted(allowed)})")
    if src.has(aux_axis):
        raise InvalidDistribution(f"source already has axis {aux_axis}")
    for a in aux.from_axes:
        if src.size(a.name) != a.size:
            raise InvalidDistribution(f"alphabet mismatch on {a.name}")
    rows = aux.filled()
    # broadcast rows over the source axes, parents in source order
    order = sorted(range(len(frm)), key=lambda i: src.axis(frm[i]))
    rows = np.transpose(rows, order + [len(frm)])
    shape = [1] * len(src.axes) + [aux.to_axis.size]
    for i in order:
        shape[src.axis(frm[i])] = src.axes[src.axis(frm[i])].size
    kernel = rows.reshape(shape)
    pmf = src.pmf[..., None] * kernel
    new_axis = Alphabet(aux_axis, aux.to_axis.size)
    axes = src.axes + (new_axis,)
    names = [a.name for a in axes]
    perm = sorted(range(len(axes)), key=lambda i: CANONICAL.index(names[i]))
    return JointSource(tuple(axes[i] for i in perm), np.transpose(pmf, perm), markov_e=src.markov_e)


def markov_residual(src: JointSource, a, b, given) -> float:
    """max |P(a,b,c) P(c) - P(a,c) P(b,c)|; zero iff a and b are independent given c."""
    a, b, given = _labels(a), _labels(b), _labels(given)
    full = _aligned(src, a + b + given)
    na, nb = len(a), len(b)
    pc = np.asarray(full.sum(axis=tuple(range(na + nb))))
    pac = full.sum(axis=tuple(range(na, na + nb)))
    pbc = full.sum(axis=tuple(range(na)))
    lhs = full * pc[(None,) * (na + nb)]
    rhs = pac[(slice(None),) * na + (None,) * nb] * pbc[(None,) * na]
    return float(np.max(np.abs(lhs - rhs)))


def constant_channel(from_axes: Iterable[Alphabet], to_name: str = "U") -> Channel:
    from_axes = tuple(from_axes)
    rows = np.ones(tuple(a.size for a in from_axes) + (1,))
    return Channel(from_axes, Alphabet(to_name, 1), rows)


def copy_channel(frm: Alphabet, to_name: str) -> Channel:
    return Channel((frm,), Alphabet(to_name, frm.size), np.eye(frm.size))
