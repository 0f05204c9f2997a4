"""
Inverse spectral problem: angle classes, admissibility and candidate enumeration
"""
