"""
CLI command groups for the BNRA toolkit
"""
