import pytest

from polydis.core import load_patterns
from polydis.systems import build_system, group_classes


_SYSTEMS = {}


@pytest.fixture(scope="session")
def system_cache():
    """Shared builder: (pattern spec tuple, mode) -> ClassSystem."""

    def get(names, mode, grouped=False):
        key = (tuple(names), mode, grouped)
        if key not in _SYSTEMS:
            if grouped:
                _SYSTEMS[key] = group_classes(get(names, mode))
            else:
                _SYSTEMS[key] = build_system(load_patterns(list(names)), mode)
        return _SYSTEMS[key]

    return get
