"""Spectral laboratory for linear and nonlinear Schrodinger equations on T^n."""
