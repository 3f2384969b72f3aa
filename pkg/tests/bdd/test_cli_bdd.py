"""Bind the command line capability specs.

Directory-level binding, so a .feature added under capabilities/cli/ is collected
automatically and can never sit there silently unbound.
"""
from pytest_bdd import scenarios

scenarios('cli')
