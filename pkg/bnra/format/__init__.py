"""
Protocol DSL and JSON codecs
"""
