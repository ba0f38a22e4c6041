"""
grassmann_engine: exact verification of conformal minimal immersions of the
two-sphere into complex Grassmannians G(2,N), with parallel second fundamental form.

All arithmetic is over the Gaussian rationals; equality of invariants is syntactic
equality of reduced rational functions in z and zb.
"""

__version__ = "1.0.0"
