"""Monte Carlo simulation and offline analysis of polarization correlations
in singlet proton pairs, with Bell (CHSH) and Wigner inequality tests."""

__version__ = "0.1.0"
