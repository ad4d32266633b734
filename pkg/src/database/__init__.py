"""
Run registry for experiment outputs
"""
