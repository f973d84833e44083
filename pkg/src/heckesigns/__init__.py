"""Signs of Hecke eigenvalues: coefficients, sign analytics, special functions and polynomial tools."""

__version__ = "0.1.0"
