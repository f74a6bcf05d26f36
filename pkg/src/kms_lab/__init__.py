"""Numerical laboratory for KMS-state perturbations via noncommutative L_p spaces."""
__version__ = "0.1.0"
