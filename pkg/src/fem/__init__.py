"""
Finite-element Steklov oracle
"""
