"""
Bounded explicit-state exploration
"""
