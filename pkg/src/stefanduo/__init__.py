"""Radially symmetric two-front reaction-diffusion systems with Stefan conditions."""

__version__ = "0.1.0"
