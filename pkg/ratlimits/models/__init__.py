"""
Input schemas and report models
"""
