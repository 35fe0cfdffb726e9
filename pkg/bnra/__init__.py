"""
BNRA Toolkit
Verification toolkit for broadcast networks of register automata
"""
__version__ = "1.0.0"
