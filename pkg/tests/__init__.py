"""
netdomain test suites.
"""
