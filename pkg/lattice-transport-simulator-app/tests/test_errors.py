import pytest

import errors


@pytest.mark.parametrize("name, code, builtin", [
    ("UnknownConfigKey", 2, ValueError),
    ("InvalidConfigValue", 2, ValueError),
    ("UnstableAxis", 3, ValueError),
    ("NonCommensurateGrid", 3, ValueError),
    ("GridMismatch", 3, ValueError),
    ("StepUnderflow", 4, RuntimeError),
    ("NoBracket", 4, RuntimeError),
])
def test_exit_codes_and_builtins(name, code, builtin):
    cls = getattr(errors, name)
    assert cls.exit_code == code
    assert issubclass(cls, errors.LatticeTransportError)
    assert issubclass(cls, builtin)
