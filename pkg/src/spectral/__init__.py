"""
Cosine-series analysis of stationary profiles
"""
