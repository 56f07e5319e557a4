"""Shared numeric tolerances.

Every sign test, feasibility check and cut comparison in the package reads
from this table so thresholds stay consistent across modules.
"""

MARGIN_TOL = 1e-9         # margin sign tests, oracle comparisons, cut validity
CUT_VIOLATION_TOL = 1e-6  # minimum violation before a cut is emitted
FEAS_TOL = 1e-7           # simplex primal feasibility
DUAL_TOL = 1e-7           # simplex reduced-cost (dual feasibility) threshold
PIVOT_TOL = 1e-9          # smallest acceptable pivot element
INT_TOL = 1e-6            # integrality test on binary variables
K_NUDGE = 1e-12           # added to eps*N before flooring
DEFAULT_GAP_TOL = 1e-4    # relative branch-and-bound gap (0.01 percent)
REFACTOR_INTERVAL = 50    # simplex basis refactorization cadence, in pivots
