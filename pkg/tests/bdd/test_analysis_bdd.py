"""Bind the flow analysis and CFG reconstruction capability specs.

Directory-level binding, so a .feature added under capabilities/analysis/ is collected
automatically and can never sit there silently unbound.
"""
from pytest_bdd import scenarios

scenarios('analysis')
