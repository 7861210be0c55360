import functools

import pytest
from hypothesis import HealthCheck, settings

from qwalkcurves.spectral import char_poly
from qwalkcurves.walks import ZOO_NAMES, zoo

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def cached_char_poly(name: str):
    return char_poly(zoo(name))


@pytest.fixture(params=ZOO_NAMES)
def walk_name(request):
    return request.param
