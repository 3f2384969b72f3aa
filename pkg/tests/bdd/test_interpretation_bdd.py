"""Bind the running programs on both interpreters capability specs.

Directory-level binding, so a .feature added under capabilities/interpretation/ is collected
automatically and can never sit there silently unbound.
"""
from pytest_bdd import scenarios

scenarios('interpretation')
