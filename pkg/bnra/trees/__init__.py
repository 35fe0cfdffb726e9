"""
Unfolding trees
"""
