"""
Command-line frontend
"""
