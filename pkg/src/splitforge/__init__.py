"""splitforge: high-precision measurement of exponentially small splitting
of 1D invariant manifolds in the generic saddle-focus (Hopf-zero) unfolding,
with inner-equation Stokes constants and asymptotic cross-validation."""

__version__ = "0.1.0"
