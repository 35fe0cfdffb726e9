"""
Reductions and protocol transforms
"""
