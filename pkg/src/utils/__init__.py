"""
Utility modules for the steklov-polygons project
"""
