"""Finite-blocklength simulation of the two-part binning scheme.

Alice quantizes Y^n to a codeword U^n(w) by joint typicality and sends the
bin J1 of w, plus the bin J2 of Y^n itself. Bob recovers w from J1 and his
side information Z^n, then Y^n from J2 given (U^n(w), Z^n). With a constant
U the scheme is plain Slepian-Wolf binning.

Random streams: every draw comes from Philox keyed by (seed, stream id), so
the codebook, the two bin maps and each trial are independent of one another
and of how trials are split across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .defaults import DEFAULTS, delta_typ_for
from .dist import Channel, JointSource, attach_aux, constant_channel, marginal
from .measures import cond_entropy, entropy_of, mutual_info
from .parallel import pmap

STREAM_CODEBOOK = 1
STREAM_B_BINS = 2
STREAM_C_BINS = 3
STREAM_TRIALS = 4

FAILURE_KINDS = ("encode", "no-codeword", "ambiguous-codeword", "no-sequence", "ambiguous-sequence")


def stream(seed: int, *ids: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(ids))))


def pow2_count(exponent: float) -> int:
    """2 ** (exponent rounded to the nearest integer), at least 1."""
    return 2 ** max(0, math.floor(exponent + 0.5))


@dataclass
class SimConfig:
    source: JointSource
    u_channel: Channel | None = None
    n: int = 8
    eps: float = DEFAULTS["eps"]
    delta_typ: float | None = None
    seed: int = 0
    trials: int = 100

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.delta_typ is None:
            self.delta_typ = delta_typ_for(self.n)
        if self.delta_typ <= 0:
            raise ValueError("delta_typ must be > 0")
        src = self.source
        if not src.has("E"):
            raise ValueError("source needs an E axis (size 1 when there is no eavesdropper)")
        if self.u_channel is None:
            self.u_channel = constant_channel([src.alphabet("Y")])

    @property
    def joint(self) -> JointSource:
        """Source extended by U drawn from Y."""
        return attach_aux(self.source, self.u_channel, "U", parents={"Y"})

    @property
    def constant_u(self) -> bool:
        return self.u_channel.to_axis.size == 1


class Rates(NamedTuple):
    i_yu: float
    i_uz: float
    h_y_uz: float
    h_y_z: float


def rate_terms(cfg: SimConfig) -> Rates:
    j = cfg.joint
    return Rates(
        mutual_info(j, "Y", "U"),
        mutual_info(j, "U", "Z"),
        cond_entropy(j, "Y", "UZ"),
        cond_entropy(j, "Y", "Z"),
    )


def rate_identity_residual(cfg: SimConfig) -> float:
    """|I(Y;U) - I(U;Z) + H(Y|U,Z) - H(Y|Z)|, zero whenever U - Y - Z."""
    r = rate_terms(cfg)
    return abs(r.i_yu - r.i_uz + r.h_y_uz - r.h_y_z)


@dataclass(frozen=True, eq=False)
class Codebook:
    words: np.ndarray  # (count, n) symbols of U
    u_size: int

    @property
    def count(self) -> int:
        return len(self.words)


@dataclass(frozen=True, eq=False)
class BinMap:
    codeword_bins: np.ndarray  # word index -> 1..b_count
    sequence_bins: np.ndarray  # y^n index -> 1..c_count
    b_count: int
    c_count: int
    b_members: dict = field(repr=False, default_factory=dict)
    c_members: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "b_members", _members(self.codeword_bins))
        object.__setattr__(self, "c_members", _members(self.sequence_bins))


def _members(bins: np.ndarray) -> dict[int, np.ndarray]:
    order = np.argsort(bins, kind="stable")
    keys, starts = np.unique(bins[order], return_index=True)
    ends = list(starts[1:]) + [len(order)]
    return {int(k): order[s:e] for k, s, e in zip(keys, starts, ends)}


def codebook_size(cfg: SimConfig) -> int:
    if cfg.constant_u:
        return 1
    r = rate_terms(cfg)
    count = max(1, round(2.0 ** (cfg.n * (r.i_yu + cfg.eps))))
    if count > DEFAULTS["max_codebook"]:
        raise ValueError(f"codebook of {count} words exceeds the limit of {DEFAULTS['max_codebook']}")
    return count


def bin_counts(cfg: SimConfig) -> tuple[int, int]:
    r = rate_terms(cfg)
    b = 1 if cfg.constant_u else pow2_count(cfg.n * (r.i_yu - r.i_uz))
    c = pow2_count(cfg.n * (r.h_y_uz + cfg.eps))
    return b, c


def build_codebook(cfg: SimConfig) -> Codebook:
    pu = marginal(cfg.joint, "U").pmf
    count = codebook_size(cfg)
    rng = stream(cfg.seed, STREAM_CODEBOOK)
    # row-major draws: a larger codebook extends a smaller one with the same seed
    words = rng.choice(len(pu), size=(count, cfg.n), p=pu)
    return Codebook(words.astype(np.int64), len(pu))


def _balanced_bins(items: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random partition into ``count`` bins of (near) equal size, labels 1..count."""
    return rng.permutation(items) % count + 1


def build_bins(cfg: SimConfig, cb: Codebook) -> BinMap:
    ny = cfg.source.size("Y")
    n_seq = ny ** cfg.n
    if n_seq > DEFAULTS["sequence_guard"]:
        raise ValueError(f"|Y|^n = {n_seq} exceeds the sequence guard of {DEFAULTS['sequence_guard']}")
    b, c = bin_counts(cfg)
    return BinMap(
        _balanced_bins(cb.count, b, stream(cfg.seed, STREAM_B_BINS)),
        _balanced_bins(n_seq, c, stream(cfg.seed, STREAM_C_BINS)),
        b,
        c,
    )


# sequences and typicality ---------------------------------------------------

def seq_index(seq: np.ndarray, size: int) -> int:
    idx = 0
    for s in seq:
        idx = idx * size + int(s)
    return idx


def seq_digits(idx, size: int, n: int) -> np.ndarray:
    """Inverse of seq_index; vectorized over an array of indices."""
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty(idx.shape + (n,), dtype=np.int64)
    rem = idx.copy()
    for i in range(n - 1, -1, -1):
        out[..., i] = rem % size
        rem //= size
    return out


def typical_rows(words: np.ndarray, seq: np.ndarray, pab: np.ndarray, delta: float) -> np.ndarray:
    """Strong typicality of each (words[r], seq) pair w.r.t. pab[a, b].

    Every pair frequency is within delta of its probability and pairs of
    probability zero never occur. A pair involving a one-symbol alphabet is
    typical by convention.
    """
    na, nb = pab.shape
    m, n = words.shape
    if na == 1 or nb == 1:
        return np.ones(m, dtype=bool)
    pair = words * nb + seq[None, :]
    flat = pair + (np.arange(m) * (na * nb))[:, None]
    counts = np.bincount(flat.ravel(), minlength=m * na * nb).reshape(m, na * nb)
    freq = counts / n
    p = pab.ravel()
    ok = np.all(np.abs(freq - p) <= delta + 1e-12, axis=1)
    forbidden = p == 0
    if forbidden.any():
        ok &= ~np.any(counts[:, forbidden] > 0, axis=1)
    return ok


# encoder / decoder ----------------------------------------------------------

class Encoded(NamedTuple):
    j1: int  # 0 is the reserved encode-failure symbol
    j2: int
    w: int | None

    @property
    def failed(self) -> bool:
        return self.w is None


class Decoded(NamedTuple):
    y_hat: np.ndarray | None
    failure: str | None


@dataclass(frozen=True, eq=False)
class Scheme:
    """Everything the encoder and decoder share for one realized code."""

    cfg: SimConfig
    codebook: Codebook
    bins: BinMap
    p_yu: np.ndarray
    p_zu: np.ndarray  # indexed [u, z]
    log_y_given_uz: np.ndarray  # [u, z, y]

    @classmethod
    def build(cls, cfg: SimConfig, cb: Codebook | None = None, bins: BinMap | None = None) -> "Scheme":
        cb = cb if cb is not None else build_codebook(cfg)
        bins = bins if bins is not None else build_bins(cfg, cb)
        j = cfg.joint
        p_yu = marginal(j, "YU").pmf
        p_zu = marginal(j, "ZU").pmf.T
        p_yzu = np.transpose(marginal(j, "YZU").pmf, (2, 1, 0))  # [u, z, y]
        norm = p_yzu.sum(axis=2, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(norm > 0, p_yzu / np.where(norm > 0, norm, 1), 0.0)
            logc = np.where(cond > 0, np.log(np.where(cond > 0, cond, 1)), -np.inf)
        return cls(cfg, cb, bins, p_yu, p_zu, logc)

    def encode(self, y_n: np.ndarray) -> Encoded:
        ny = self.cfg.source.size("Y")
        j2 = int(self.bins.sequence_bins[seq_index(y_n, ny)])
        # typicality of (u^n, y^n) w.r.t. P(u, y)
        ok = typical_rows(self.codebook.words, np.asarray(y_n), self.p_yu.T, self.cfg.delta_typ)
        hits = np.flatnonzero(ok)
        if hits.size == 0:
            return Encoded(0, j2, None)
        w = int(hits[0])
        return Encoded(int(self.bins.codeword_bins[w]), j2, w)

    def decode(self, j1: int, j2: int, z_n: np.ndarray) -> Decoded:
        cands = self.bins.b_members.get(int(j1))
        if cands is None or cands.size == 0:
            return Decoded(None, "no-codeword")
        ok = typical_rows(self.codebook.words[cands], np.asarray(z_n), self.p_zu, self.cfg.delta_typ)
        hits = cands[ok]
        if hits.size == 0:
            return Decoded(None, "no-codeword")
        if hits.size > 1:
            return Decoded(None, "ambiguous-codeword")
        u_n = self.codebook.words[hits[0]]
        seqs = self.bins.c_members.get(int(j2))
        if seqs is None or seqs.size == 0:
            return Decoded(None, "no-sequence")
        ny = self.cfg.source.size("Y")
        ys = seq_digits(seqs, ny, self.cfg.n)
        # Slepian-Wolf step: the unique most likely y^n in the bin given (u^n, z^n)
        score = self.log_y_given_uz[u_n[None, :], np.asarray(z_n)[None, :], ys].sum(axis=1)
        best = score.max()
        if not np.isfinite(best):
            return Decoded(None, "no-sequence")
        top = np.flatnonzero(score >= best - 1e-12)
        if top.size > 1:
            return Decoded(None, "ambiguous-sequence")
        return Decoded(ys[top[0]], None)


def encode(y_n, cb: Codebook, bins: BinMap, cfg: SimConfig) -> Encoded:
    return Scheme.build(cfg, cb, bins).encode(np.asarray(y_n))


def decode(j1, j2, z_n, cb: Codebook, bins: BinMap, cfg: SimConfig) -> Decoded:
    return Scheme.build(cfg, cb, bins).decode(j1, j2, np.asarray(z_n))


# trials ---------------------------------------------------------------------

@dataclass
class TrialReport:
    n: int
    eps: float
    delta_typ: float
    seed: int
    trials: int
    codebook_size: int
    b_bins: int
    c_bins: int
    errors: int = 0
    failures: dict = field(default_factory=lambda: {k: 0 for k in FAILURE_KINDS})
    equivocation_per_symbol: float | None = None

    @property
    def error_rate(self) -> float | None:
        return self.errors / self.trials if self.trials else None

    @property
    def encode_failure_rate(self) -> float | None:
        return self.failures["encode"] / self.trials if self.trials else None

    @property
    def rate(self) -> float:
        """Realized public rate log2(#B) + log2(#C), bits per symbol."""
        return (math.log2(self.b_bins) + math.log2(self.c_bins)) / self.n


def draw_block(src: JointSource, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    flat = src.pmf.ravel()
    idx = rng.choice(flat.size, size=n, p=flat / flat.sum())
    coords = np.unravel_index(idx, src.pmf.shape)
    return {l: np.asarray(c) for l, c in zip(src.labels, coords)}


def _trial_chunk(args):
    scheme, start, stop = args
    cfg = scheme.cfg
    errors = 0
    failures = {k: 0 for k in FAILURE_KINDS}
    for t in range(start, stop):
        block = draw_block(cfg.source, cfg.n, stream(cfg.seed, STREAM_TRIALS, t))
        enc = scheme.encode(block["Y"])
        if enc.failed:
            failures["encode"] += 1
            errors += 1
            continue
        dec = scheme.decode(enc.j1, enc.j2, block["Z"])
        if dec.failure is not None:
            failures[dec.failure] += 1
            errors += 1
        elif not np.array_equal(dec.y_hat, block["Y"]):
            errors += 1
    return errors, failures


def run_trials(cfg: SimConfig, jobs: int | None = 1, exact: bool = False, scheme: Scheme | None = None) -> TrialReport:
    scheme = scheme or Scheme.build(cfg)
    report = TrialReport(
        cfg.n, cfg.eps, cfg.delta_typ, cfg.seed, cfg.trials,
        scheme.codebook.count, scheme.bins.b_count, scheme.bins.c_count,
    )
    if cfg.trials:
        size = max(1, math.ceil(cfg.trials / 16))
        chunks = [(scheme, s, min(s + size, cfg.trials)) for s in range(0, cfg.trials, size)]
        for errors, failures in pmap(_trial_chunk, chunks, jobs):
            report.errors += errors
            for k, v in failures.items():
                report.failures[k] += v
    if exact:
        report.equivocation_per_symbol = exact_equivocation(cfg, scheme.codebook, scheme.bins)
    return report


def sw_baseline(cfg: SimConfig, jobs: int | None = 1, exact: bool = False) -> TrialReport:
    if not cfg.constant_u:
        raise ValueError("Slepian-Wolf baseline needs a constant U channel")
    return run_trials(cfg, jobs=jobs, exact=exact)


# exact equivocation -----------------------------------------------------------

def message_map(scheme: Scheme) -> np.ndarray:
    """Public message id for every y^n; encode failures use J1 = 0."""
    cfg = scheme.cfg
    ny = cfg.source.size("Y")
    n_seq = ny ** cfg.n
    digits = seq_digits(np.arange(n_seq), ny, cfg.n)
    out = np.empty(n_seq, dtype=np.int64)
    stride = scheme.bins.c_count + 1
    for i in range(n_seq):
        enc = scheme.encode(digits[i])
        out[i] = enc.j1 * stride + enc.j2
    return out


def exact_equivocation(cfg: SimConfig, cb: Codebook, bins: BinMap) -> float:
    """(1/n) H(X^n | J1, J2, E^n) for the realized code, by full enumeration."""
    src = cfg.source
    nx, ny, ne = src.size("X"), src.size("Y"), src.size("E")
    states = (nx * ny * ne) ** cfg.n
    if states > DEFAULTS["exact_guard"]:
        raise ValueError(f"(|X||Y||E|)^n = {states} exceeds the exact-equivocation guard of {DEFAULTS['exact_guard']}")
    scheme = Scheme.build(cfg, cb, bins)
    msg = message_map(scheme)

    pxye = np.moveaxis(marginal(src, "XYE").pmf, 1, 0)  # [y, x, e]
    py = pxye.reshape(ny, -1).sum(axis=1)
    kern = np.divide(pxye, py[:, None, None], out=np.zeros_like(pxye), where=py[:, None, None] > 0)
    kern = kern.reshape(ny, nx * ne)
    digits = seq_digits(np.arange(ny ** cfg.n), ny, cfg.n)
    p_seq = np.prod(py[digits], axis=1)

    h_joint = 0.0  # H(X^n, E^n, M)
    h_cond = 0.0   # H(E^n, M)
    for m in np.unique(msg):
        acc = np.zeros((nx * ne) ** cfg.n)
        for i in np.flatnonzero(msg == m):
            if p_seq[i] == 0:
                continue
            vec = np.array([p_seq[i]])
            for y in digits[i]:
                vec = np.kron(vec, kern[y])
            acc += vec
        h_joint += entropy_of(acc)
        e_marg = acc.reshape((nx, ne) * cfg.n).sum(axis=tuple(range(0, 2 * cfg.n, 2)))
        h_cond += entropy_of(e_marg)
    return (h_joint - h_cond) / cfg.n
