"""
Experiment configuration, presets and command dispatch
"""
