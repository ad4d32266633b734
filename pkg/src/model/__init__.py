"""
Model definition, parameters and homogeneous steady states
"""
