"""
Linear stability analysis of homogeneous states
"""
