"""
Tests for the steklov-polygons project
"""
