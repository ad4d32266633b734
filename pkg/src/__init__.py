"""
Chemotactic Lotka-Volterra Pattern Laboratory
Simulation, linear stability and Galerkin analysis of two competing species
with one-way chemorepulsive coupling
"""

__version__ = "1.0.0"
__author__ = "Pattern Lab Team"
