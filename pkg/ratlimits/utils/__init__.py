"""
Utility Functions Package
"""
