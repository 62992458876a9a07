"""
Backend modules for curvature jets, soliton models, level-set geometry and decay analysis.
"""
