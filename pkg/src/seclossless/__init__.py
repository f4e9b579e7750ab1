"""Equivocation bounds, multi-letter identity checks and a binning simulator
for lossless source coding with side information and an eavesdropper."""
from .dist import (
    Alphabet, Channel, InvalidDistribution, JointSource, attach_aux, bsc, compose_markov,
    condition, constant_channel, make_channel, make_source, marginal, markov_residual,
    source_from_y, validate,
)
from .measures import InconsistencyError, cond_entropy, cond_mutual_info, entropy, info_table, mutual_info
from .region import (
    InfeasibleBudget, Mode, RegionPoint, budget_grid, optimize_u, optimize_v, region_frontier,
    sw_equivocation, u_gain, v_tradeoff,
)
from .envelope import EnvelopeProblem, solve_envelope
from .oracle import random_restart_u
from .identities import GuardExceeded, MultiLetterJoint, identity3_residual, lemma1_residual, random_multiletter
from .binning import SimConfig, TrialReport, exact_equivocation, run_trials, sw_baseline
from .fileio import emit_csv, load_channel, load_fixture, load_source

__version__ = "0.1.0"
