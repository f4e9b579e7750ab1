import math
from collections import Counter

import numpy as np
import pytest
from scipy.optimize import brentq

from seclossless import (
    SimConfig, bsc, cond_entropy, entropy, exact_equivocation, mutual_info, run_trials, sw_baseline,
    sw_equivocation,
)
from seclossless.binning import (
    Scheme, bin_counts, build_bins, build_codebook, decode, encode, pow2_count, rate_identity_residual,
    rate_terms, seq_digits, seq_index,
)
from seclossless.dist import make_channel, source_from_y

from conftest import binary_entropy


def u_from_y(p, size=2):
    return make_channel({"Y": 2}, ("U", size), bsc(p) if size == 2 else p)


def test_pow2_count_rounding():
    assert pow2_count(-3.0) == 1
    assert pow2_count(2.49) == 4
    assert pow2_count(2.5) == 8


def test_seq_index_roundtrip():
    seqs = seq_digits(np.arange(27), 3, 3)
    assert [seq_index(s, 3) for s in seqs] == list(range(27))


def test_point_mass_codebook(dsbs):
    u = make_channel({"Y": 2}, ("U", 2), [[1.0, 0.0], [1.0, 0.0]])
    cb = build_codebook(SimConfig(dsbs, u, n=6, eps=0.5))
    assert cb.count == round(2 ** 3)
    assert np.all(cb.words == 0)


def test_codebook_deterministic(dsbs):
    cfg = SimConfig(dsbs, u_from_y(0.1), n=8, seed=5)
    assert np.array_equal(build_codebook(cfg).words, build_codebook(cfg).words)
    other = build_codebook(SimConfig(dsbs, u_from_y(0.1), n=8, seed=6))
    assert not np.array_equal(build_codebook(cfg).words, other.words)


def test_codebook_symbol_frequency(dsbs):
    # I(Y;U) = 0.75 with eps = 0 gives 2^6 words at n = 8
    p = brentq(lambda t: 1 - binary_entropy(t) - 0.75, 1e-6, 0.5 - 1e-6)
    cb = build_codebook(SimConfig(dsbs, u_from_y(p), n=8, eps=0.0, seed=1))
    assert cb.count == 64
    assert abs(cb.words.mean() - 0.5) < 0.1


def test_codebook_overflow(dsbs):
    with pytest.raises(ValueError):
        build_codebook(SimConfig(dsbs, u_from_y(0.0), n=40, eps=0.0))


def test_bins_cover_everything(dsbs):
    cfg = SimConfig(dsbs, u_from_y(0.1), n=8, eps=0.1, seed=2)
    cb = build_codebook(cfg)
    bins = build_bins(cfg, cb)
    b, c = bin_counts(cfg)
    assert bins.codeword_bins.shape == (cb.count,) and bins.sequence_bins.shape == (2 ** 8,)
    assert set(np.unique(bins.codeword_bins)) <= set(range(1, b + 1))
    assert set(np.unique(bins.sequence_bins)) == set(range(1, c + 1))
    # balanced partition
    counts = np.bincount(bins.sequence_bins)[1:]
    assert counts.max() - counts.min() <= 1


@pytest.mark.parametrize("seed", range(50))
def test_rate_identity(dsbs, seed):
    rows = np.random.default_rng(seed).dirichlet(np.ones(3), size=2)
    cfg = SimConfig(dsbs, make_channel({"Y": 2}, ("U", 3), rows), n=8)
    assert rate_identity_residual(cfg) < 1e-9


def test_bin_exponents_within_rounding(dsbs):
    for n in (4, 8, 12):
        cfg = SimConfig(dsbs, u_from_y(0.05), n=n, eps=0.1)
        r = rate_terms(cfg)
        b, c = bin_counts(cfg)
        assert abs(math.log2(b) / n - (r.i_yu - r.i_uz)) <= 0.5 / n + 1e-12
        assert abs(math.log2(c) / n - (r.h_y_uz + 0.1)) <= 0.5 / n + 1e-12


def test_constant_u_always_first_bin(dsbs):
    cfg = SimConfig(dsbs, n=6, seed=3)
    scheme = Scheme.build(cfg)
    for y in seq_digits(np.arange(64), 2, 6):
        enc = scheme.encode(y)
        assert enc.j1 == 1 and enc.w == 0


def test_huge_delta_accepts_first_codeword(dsbs):
    cfg = SimConfig(dsbs, u_from_y(0.1), n=6, delta_typ=10.0, seed=4)
    cb, scheme = build_codebook(cfg), None
    bins = build_bins(cfg, cb)
    for y in seq_digits(np.arange(0, 64, 7), 2, 6):
        enc = encode(y, cb, bins, cfg)
        assert enc.w == 0 and enc.j1 == bins.codeword_bins[0]


def _typical_by_definition(u, y, p_uy, delta):
    n = len(u)
    counts = Counter(zip(u.tolist(), y.tolist()))
    for a in range(p_uy.shape[0]):
        for b in range(p_uy.shape[1]):
            f = counts.get((a, b), 0) / n
            if p_uy[a, b] == 0 and f > 0:
                return False
            if abs(f - p_uy[a, b]) > delta + 1e-12:
                return False
    return True


def test_encoder_against_typicality_oracle(dsbs):
    cfg = SimConfig(dsbs, u_from_y(0.1), n=8, seed=7)
    cb = build_codebook(cfg)
    bins = build_bins(cfg, cb)
    # P(u, y) from the fixture: Y uniform through a 0.1 flip
    p_uy = 0.5 * bsc(0.1)
    for y in seq_digits(np.arange(256), 2, 8):
        hit = next((w for w, u in enumerate(cb.words) if _typical_by_definition(u, y, p_uy, cfg.delta_typ)), None)
        enc = encode(y, cb, bins, cfg)
        assert enc.w == hit
        assert enc.j1 == (0 if hit is None else bins.codeword_bins[hit])
        assert enc.j2 == bins.sequence_bins[seq_index(y, 2)]


def test_noiseless_side_info_one_sequence_per_bin():
    src = source_from_y([0.4, 0.6], bsc(0.2), np.eye(2), bsc(0.3))
    cfg = SimConfig(src, n=5, eps=1.0, seed=1, trials=200)
    assert bin_counts(cfg)[1] == 2 ** 5
    assert run_trials(cfg).errors == 0


def test_empty_codeword_bin(dsbs):
    cfg = SimConfig(dsbs, n=4)
    cb = build_codebook(cfg)
    bins = build_bins(cfg, cb)
    dec = decode(99, 1, np.zeros(4, dtype=int), cb, bins, cfg)
    assert dec.failure == "no-codeword" and dec.y_hat is None


def test_constant_y_never_errs(y_const):
    rep = run_trials(SimConfig(y_const, n=6, trials=100, seed=2))
    assert rep.error_rate == 0.0


def test_zero_trials(dsbs):
    rep = run_trials(SimConfig(dsbs, n=6, trials=0))
    assert rep.error_rate is None and rep.encode_failure_rate is None


def test_run_trials_deterministic_and_jobs_invariant(dsbs):
    cfg = SimConfig(dsbs, u_from_y(0.1), n=8, seed=9, trials=64)
    a, b, c = run_trials(cfg), run_trials(cfg), run_trials(cfg, jobs=2)
    assert a == b == c


def test_sw_baseline_requires_constant_u(dsbs):
    with pytest.raises(ValueError):
        sw_baseline(SimConfig(dsbs, u_from_y(0.1), n=4))


def test_sw_baseline_error_falls_with_eps():
    # Z = Y: bins only need to beat the rate slack
    src = source_from_y([0.5, 0.5], bsc(0.1), np.eye(2), bsc(0.3))
    rates = [np.mean([sw_baseline(SimConfig(src, n=8, eps=e, seed=s, trials=50)).error_rate for s in range(5)])
             for e in (0.25, 0.5, 1.0)]
    assert rates[0] >= rates[1] >= rates[2] == 0.0


def test_sw_reference_without_eve():
    src = source_from_y([0.5, 0.5], np.eye(2), bsc(0.2))
    assert sw_equivocation(src).raw == pytest.approx(mutual_info(src, "Y", "Z"), abs=1e-12)


def test_encode_failure_falls_with_codebook_size(dsbs):
    rates = []
    for eps in (0.0, 0.15, 0.3, 0.5):
        reps = [run_trials(SimConfig(dsbs, u_from_y(0.1), n=8, eps=eps, seed=s, trials=100)) for s in range(5)]
        rates.append(np.mean([r.encode_failure_rate for r in reps]))
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_exact_equivocation_constant_y(y_const):
    cfg = SimConfig(y_const, n=4)
    cb = build_codebook(cfg)
    h = exact_equivocation(cfg, cb, build_bins(cfg, cb))
    assert h == pytest.approx(cond_entropy(y_const, "X", "E"), abs=1e-9)


def test_exact_equivocation_independent_x():
    src = source_from_y([0.3, 0.7], [[0.35, 0.65], [0.35, 0.65]], bsc(0.2), bsc(0.1))
    cfg = SimConfig(src, n=5, eps=0.0)
    cb = build_codebook(cfg)
    assert exact_equivocation(cfg, cb, build_bins(cfg, cb)) == pytest.approx(entropy(src, "X"), abs=1e-9)


def test_exact_equivocation_bounds(dsbs):
    lo, hi = cond_entropy(dsbs, "X", "YE"), entropy(dsbs, "X")
    for seed in range(4):
        cfg = SimConfig(dsbs, u_from_y(0.15), n=5, eps=0.1, seed=seed)
        cb = build_codebook(cfg)
        h = exact_equivocation(cfg, cb, build_bins(cfg, cb))
        assert lo - 1e-9 <= h <= hi + 1e-9


def test_exact_equivocation_guard(dsbs):
    cfg = SimConfig(dsbs, n=9)
    cb = build_codebook(cfg)
    with pytest.raises(ValueError):
        exact_equivocation(cfg, cb, build_bins(cfg, cb))
