"""
Characteristic polynomials, quasi-eigenvalues and eigenvalue upper bounds
"""
