"""
Numerical core
"""
