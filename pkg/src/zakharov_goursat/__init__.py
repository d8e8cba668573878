"""Linearized and nonlinear Goursat problems for the paraxial Zakharov system.

Modules:

* :mod:`.kernels` - contour-integral fundamental solutions and their envelopes
* :mod:`.linear_goursat` - per-frequency linear solvers, growth-law fits
* :mod:`.nonlinear_solver` - split-step/Duhamel Picard solver and instability runs
* :mod:`.analytic` - majorant-series norms and the analytic existence threshold
* :mod:`.physics_units` - physical scaling, amplification factor, thresholds
* :mod:`.cli` - experiment runner (``python3 -m zakharov_goursat``)
"""

__version__ = "0.1.0"
