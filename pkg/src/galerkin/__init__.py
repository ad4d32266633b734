"""
Truncated Galerkin solution of the stationary system
"""
