"""
Finite-volume simulation of the chemotactic competition system
"""
