"""
Tests pour popcap
"""
