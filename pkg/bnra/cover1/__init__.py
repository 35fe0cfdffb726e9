"""
Coverability for 1-register protocols
"""
