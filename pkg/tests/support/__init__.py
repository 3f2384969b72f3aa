"""Shared test support: corpus loaders and program builders.

Import the builders in :mod:`tests.support.factories` directly as plain functions.
"""
