"""Command-line front end: info, region, verify, simulate."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import binning, fileio, identities, oracle, region
from .defaults import DEFAULTS
from .dist import InvalidDistribution
from .measures import cond_entropy, entropy, info_table
from .parallel import JOBS_ENV, pmap

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2

REGION_SCHEMA = ["mode", "r_a", "r_c", "delta_raw", "delta_clamped"]
VERIFY_SCHEMA = ["seed", "n", "j_size", "identity", "residual", "ok"]
SIM_SCHEMA = [
    "seed", "n", "eps", "delta_typ", "trials", "codebook_size", "b_bins", "c_bins", "rate",
    "error_rate", "encode_failure_rate", "no_codeword", "ambiguous_codeword", "no_sequence",
    "ambiguous_sequence", "equivocation_per_symbol",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad usage is a validation failure (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    subcommand: str
    source_path: str | None = None
    mode: str | None = None
    ra: str = "auto"
    rc: str = "auto"
    grid_resolution: int | None = None
    refine: bool = True
    n: list = field(default_factory=lambda: [8])
    eps: list = field(default_factory=lambda: [DEFAULTS["eps"]])
    delta_typ: float | None = None
    seed: list = field(default_factory=lambda: [0])
    trials: int = 100
    output_path: str = "-"
    u_channel_path: str | None = None
    witness_path: str | None = None
    codebook_path: str | None = None
    exact_equivocation: bool = False
    cross_check: int = 0
    j_sizes: list = field(default_factory=lambda: [1, 2, 3])
    sizes: list = field(default_factory=lambda: [2, 2, 2])
    seeds: int = 50
    tol: float = 1e-9
    jobs: int | None = None


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def parse_budgets(spec: str, lo: float, hi: float, points: int = 5) -> list[float]:
    """'auto' (points from lo to hi), 'a:b:k' (k evenly spaced) or 'v1,v2,...'."""
    spec = spec.strip()
    if spec == "auto":
        return [float(v) for v in np.linspace(lo, hi, points)]
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"budget range {spec!r} must be a:b:k")
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
        if k < 1:
            raise ValueError("budget range needs k >= 1")
        return [float(v) for v in np.linspace(a, b, k)]
    vals = _floats(spec)
    if not vals:
        raise ValueError("empty budget list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seclossless", description="Equivocation regions, identity checks and binning simulation.")
    p.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or all cores)")
    # --jobs is accepted before or after the subcommand
    jobs = _Parser(add_help=False)
    jobs.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    s = sub.add_parser("info", parents=[jobs], help="table of entropies and mutual informations")
    s.add_argument("source")
    s.add_argument("--out", default="-")

    s = sub.add_parser("region", parents=[jobs], help="equivocation bound over a budget grid")
    s.add_argument("source")
    s.add_argument("--mode", required=True, choices=[m.value for m in region.Mode])
    s.add_argument("--ra", default="auto", help="R_A budgets: auto | a:b:k | v1,v2,...")
    s.add_argument("--rc", default="auto", help="R_C budgets: auto | a:b:k | v1,v2,...")
    s.add_argument("--grid-resolution", type=int, default=None)
    s.add_argument("--no-refine", action="store_true", help="pure grid LP, no column generation")
    s.add_argument("--seed", type=int, default=0, help="seed of the random-restart cross-check")
    s.add_argument("--cross-check", type=int, default=0, metavar="RESTARTS",
                   help="also run the random-restart optimizer and record it in the witness dump")
    s.add_argument("--witness-out", default=None)
    s.add_argument("--out", default="-")

    s = sub.add_parser("verify", parents=[jobs], help="exhaustive check of the multi-letter identities")
    s.add_argument("--n", default="2,3")
    s.add_argument("--j", default="1,2,3", help="sizes of J")
    s.add_argument("--sizes", default="2,2,2", help="sizes of X,Y,E")
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--out", default="-")

    s = sub.add_parser("simulate", parents=[jobs], help="Monte Carlo run of the binning scheme")
    s.add_argument("source")
    s.add_argument("--u-channel", default=None, help="JSON channel P(u|y); absent means constant U")
    s.add_argument("--n", default="8")
    s.add_argument("--eps", default=str(DEFAULTS["eps"]))
    s.add_argument("--delta-typ", type=float, default=None)
    s.add_argument("--seed", default="0")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--exact-equivocation", action="store_true")
    s.add_argument("--dump-codebook", default=None, help="JSON file for the realized codebook and bins")
    s.add_argument("--out", default="-")
    return p


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.subcommand is None:
        raise UsageError("seclossless: error: a subcommand is required (info, region, verify, simulate)")
    cfg = RunConfig(ns.subcommand, jobs=ns.jobs, output_path=ns.out)
    if ns.subcommand in ("info", "region", "simulate"):
        cfg.source_path = ns.source
    if ns.subcommand == "region":
        cfg.mode, cfg.ra, cfg.rc = ns.mode, ns.ra, ns.rc
        cfg.grid_resolution, cfg.refine = ns.grid_resolution, not ns.no_refine
        cfg.seed, cfg.cross_check, cfg.witness_path = [ns.seed], ns.cross_check, ns.witness_out
    elif ns.subcommand == "verify":
        cfg.n, cfg.j_sizes, cfg.sizes = _ints(ns.n), _ints(ns.j), _ints(ns.sizes)
        cfg.seeds, cfg.tol = ns.seeds, ns.tol
    elif ns.subcommand == "simulate":
        cfg.n, cfg.eps, cfg.seed = _ints(ns.n), _floats(ns.eps), _ints(ns.seed)
        cfg.delta_typ, cfg.trials = ns.delta_typ, ns.trials
        cfg.u_channel_path, cfg.exact_equivocation = ns.u_channel, ns.exact_equivocation
        cfg.codebook_path = ns.dump_codebook
    return cfg


# subcommands ------------------------------------------------------------------

def _info(cfg: RunConfig) -> int:
    src = fileio.load_source(cfg.source_path)
    fileio.emit_csv(info_table(src), ["quantity", "bits"], cfg.output_path)
    return EXIT_OK


def _region(cfg: RunConfig) -> int:
    src = fileio.load_source(cfg.source_path)
    mode = region.Mode(cfg.mode)
    ra = parse_budgets(cfg.ra, cond_entropy(src, "Y", "Z"), entropy(src, "Y"))
    rc = parse_budgets(cfg.rc, 0.0, entropy(src, "Z"))
    if mode in (region.Mode.THM3, region.Mode.SW_BASELINE):
        rc = [entropy(src, "Z")]
    if min(ra + rc) < 0:
        raise ValueError("budgets must be non-negative")
    points = region.region_frontier(
        src, mode, region.budget_grid(ra, rc), cfg.grid_resolution, cfg.refine, cfg.jobs
    )
    rows = [(p.mode.value, p.r_a, p.r_c, p.delta_raw, p.delta) for p in points]
    fileio.emit_csv(rows, REGION_SCHEMA, cfg.output_path)
    if cfg.witness_path:
        doc = {"mode": mode.value, "points": [_point_doc(p) for p in points]}
        if cfg.cross_check and mode is not region.Mode.SW_BASELINE:
            val, _ = oracle.random_restart_u(oracle.dense_xyze(src), mode, cfg.cross_check, cfg.seed[0])
            doc["random_restart_u"] = {"restarts": cfg.cross_check, "seed": cfg.seed[0], "value": val}
        fileio.write_json(doc, cfg.witness_path)
    return EXIT_OK


def _point_doc(p: region.RegionPoint) -> dict:
    return {
        "r_a": p.r_a, "r_c": p.r_c, "feasible": p.feasible,
        "delta_raw": p.delta_raw, "delta_clamped": p.delta,
        "u_value": p.u_value, "v_value": p.v_value,
        "h_y_given_v": p.h_y_given_v, "i_z_v": p.i_z_v,
        "u_channel": fileio.channel_to_dict(p.u_channel) if p.u_channel is not None else None,
        "v_channel": fileio.channel_to_dict(p.v_channel) if p.v_channel is not None else None,
    }


def _verify_task(args):
    n, j, sizes, seed = args
    m = identities.random_multiletter(n, (j,) + tuple(sizes), seed)
    out = [("lemma1", identities.lemma1_residual(m))]
    if len(sizes) < 3 or sizes[2] == 1:
        out.append(("identity3", identities.identity3_residual(m)))
    return [(seed, n, j, name, r) for name, r in out]


def _verify(cfg: RunConfig) -> int:
    if len(cfg.sizes) not in (2, 3) or cfg.seeds < 0:
        raise ValueError("--sizes takes X,Y or X,Y,E; --seeds must be >= 0")
    tasks = [(n, j, cfg.sizes, s) for n in cfg.n for j in cfg.j_sizes for s in range(cfg.seeds)]
    # E-free identity is only defined with |E| = 1; run it on the same seeds without E
    if len(cfg.sizes) == 3 and cfg.sizes[2] != 1:
        tasks += [(n, j, cfg.sizes[:2], s) for n in cfg.n for j in cfg.j_sizes for s in range(cfg.seeds)]
    rows = [r for chunk in pmap(_verify_task, tasks, cfg.jobs) for r in chunk]
    bad = [r for r in rows if not r[4] < cfg.tol]
    fileio.emit_csv([r + (r[4] < cfg.tol,) for r in rows], VERIFY_SCHEMA, cfg.output_path)
    if bad:
        worst = max(r[4] for r in bad)
        print(f"verify: {len(bad)} residual(s) above {cfg.tol:g}, worst {worst:.3g}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _simulate(cfg: RunConfig) -> int:
    src = fileio.load_source(cfg.source_path)
    u_ch = fileio.load_channel(cfg.u_channel_path) if cfg.u_channel_path else None
    rows, dumps = [], []
    for seed in cfg.seed:
        for n in cfg.n:
            for eps in cfg.eps:
                sc = binning.SimConfig(src, u_ch, n=n, eps=eps, delta_typ=cfg.delta_typ, seed=seed, trials=cfg.trials)
                scheme = binning.Scheme.build(sc)
                rep = binning.run_trials(sc, jobs=cfg.jobs, exact=cfg.exact_equivocation, scheme=scheme)
                rows.append(_report_row(rep))
                if cfg.codebook_path:
                    dumps.append(_scheme_doc(sc, scheme))
    fileio.emit_csv(rows, SIM_SCHEMA, cfg.output_path)
    if cfg.codebook_path:
        fileio.write_json({"runs": dumps}, cfg.codebook_path)
    return EXIT_OK


def _report_row(rep: binning.TrialReport) -> dict:
    row = {
        "seed": rep.seed, "n": rep.n, "eps": rep.eps, "delta_typ": rep.delta_typ, "trials": rep.trials,
        "codebook_size": rep.codebook_size, "b_bins": rep.b_bins, "c_bins": rep.c_bins, "rate": rep.rate,
        "error_rate": rep.error_rate, "encode_failure_rate": rep.encode_failure_rate,
        "equivocation_per_symbol": rep.equivocation_per_symbol,
    }
    for k in binning.FAILURE_KINDS:
        if k != "encode":
            row[k.replace("-", "_")] = rep.failures[k] if rep.trials else None
    return row


def _scheme_doc(sc: binning.SimConfig, scheme: binning.Scheme) -> dict:
    return {
        "seed": sc.seed, "n": sc.n, "eps": sc.eps, "delta_typ": sc.delta_typ,
        "codewords": scheme.codebook.words.tolist(),
        "codeword_bins": scheme.bins.codeword_bins.tolist(),
        "b_bins": scheme.bins.b_count, "c_bins": scheme.bins.c_count,
        "sequence_bins": scheme.bins.sequence_bins.tolist(),
    }


_DISPATCH = {"info": _info, "region": _region, "verify": _verify, "simulate": _simulate}


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the process exit code."""
    handler = _DISPATCH.get(cfg.subcommand)
    if handler is None:
        print(f"seclossless: unknown subcommand {cfg.subcommand!r}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        return handler(cfg)
    except (InvalidDistribution, fileio.SourceFormatError, region.StructureError,
            identities.GuardExceeded, ValueError, OSError) as exc:
        print(f"seclossless {cfg.subcommand}: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"seclossless: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
