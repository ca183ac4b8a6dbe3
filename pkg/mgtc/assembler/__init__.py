"""
From sentence labels to process models: structure trees, graphs and DOT.
"""
