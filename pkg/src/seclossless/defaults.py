"""Single table of tunable defaults shared by the library and the CLI.

grid_resolution_*     lattice denominator for posterior atoms, by simplex size
                      (2-3 symbols / 4 symbols / 5 or more)
refine_*              column-generation refinement of the lattice LP
weight_cutoff         LP weights at or below this are treated as zero
budget_slack          added to rate budgets so boundary points stay feasible
delta_typ_short/long  typicality slack for n <= 8 / n > 8
eps                   rate slack of the binning scheme
oracle_restarts       random restarts of the independent U optimizer
multiletter_guard     max joint states for exhaustive multi-letter entropies
exact_guard           max (|X||Y||E|)^n for exact equivocation
sequence_guard        max |Y|^n for materialized sequence bin maps
max_codebook          largest codebook accepted
"""

DEFAULTS = {
    "grid_resolution_small": 24,
    "grid_resolution_4": 8,
    "grid_resolution_large": 4,
    "refine_start_step": 1 / 48,
    "refine_min_step": 1e-7,
    "refine_max_lp": 400,
    "refine_gain_tol": 1e-13,
    "weight_cutoff": 1e-14,
    "budget_slack": 1e-12,
    "delta_typ_short": 0.1,
    "delta_typ_long": 0.05,
    "eps": 0.1,
    "oracle_restarts": 200,
    "multiletter_guard": 10**7,
    "exact_guard": 2**24,
    "sequence_guard": 2**22,
    "max_codebook": 2**31,
}


def delta_typ_for(n: int) -> float:
    return DEFAULTS["delta_typ_short"] if n <= 8 else DEFAULTS["delta_typ_long"]
