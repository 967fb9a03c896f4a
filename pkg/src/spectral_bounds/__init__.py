"""Semiclassical eigenvalue bounds for the Dirichlet and Neumann Laplacian, with reference spectra."""

__version__ = "0.1.0"
