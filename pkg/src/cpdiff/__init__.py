"""Diffraction of weighted model sets and dense Dirac combs."""

__version__ = "0.1.0"
