"""Wiring for the executable capability specs.

Step definitions live in tests/features/steps/ next to the features they describe;
this star-imports them so pytest can find them. pytest-bdd's given/when/then decorators
create fixtures, and fixtures are discovered from a conftest regardless of where the
function was defined.

Deliberately not `pytest_plugins`: pytest >= 7 errors on that outside the rootdir
conftest, and the rootdir here is the project root where pytest.ini lives, not tests/.

Shared code is imported flat (`harness`, `cfa`), the way `pythonpath = . shared` in
pytest.ini and the console script both see it.
"""
from tests.features.steps.common_steps import *  # noqa: F401,F403
from tests.features.steps.interpretation_steps import *  # noqa: F401,F403
from tests.features.steps.obfuscation_steps import *  # noqa: F401,F403
from tests.features.steps.analysis_steps import *  # noqa: F401,F403
from tests.features.steps.cli_steps import *  # noqa: F401,F403
