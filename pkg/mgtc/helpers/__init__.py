"""
Plotting helpers: house rc parameters and palettes.
"""
