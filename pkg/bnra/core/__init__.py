"""
Protocols, configurations, steps and runs of broadcast networks of register automata
"""
