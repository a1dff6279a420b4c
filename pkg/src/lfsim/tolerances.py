"""Numerical tolerances shared by every module.

Arithmetic checks (norms, traces, probability sums) use ``ARITH``; structural
checks (unitarity, Kraus completeness, positivity) use ``STRUCT``.
"""

ARITH = 1e-12
STRUCT = 1e-10

# behavior normalisation / no-signalling
BEHAVIOR = 1e-9
# LP feasibility (phase-1 optimum, constraint residuals)
LP = 1e-9
# decision tolerance for LF membership and CHSH bound comparisons
LF_DECISION = 1e-7
