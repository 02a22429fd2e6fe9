"""Optimal phase conjugation of Gaussian continuous-variable states."""
