"""Given/when/then bindings for the fjobf capability scenarios, one module per capability.

The `*_steps.py` names keep pytest from collecting these as tests; tests/bdd/conftest.py
imports them.
"""
