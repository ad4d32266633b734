"""
Utility functions for result output and column metadata
"""
