"""
soliton_lab
===========

Numerical toolkit for level sets of steady gradient Ricci solitons.
"""

__version__ = "0.1.0"
