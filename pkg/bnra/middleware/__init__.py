"""
Middleware for command invocations
"""
