"""Marginals and dynamical scaling of fractional non-homogeneous Poisson processes."""

__version__ = '0.1.0'
