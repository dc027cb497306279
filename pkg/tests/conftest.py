import pytest
from hypothesis import HealthCheck, settings

from mpmath import mp

from lvalues import store

settings.register_profile("lv", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lv")


@pytest.fixture
def cache_dir(tmp_path):
    old = store.get_cache_dir()
    store.set_cache_dir(tmp_path)
    store.clear_memory()
    yield tmp_path
    store.set_cache_dir(old)
    store.clear_memory()


@pytest.fixture(autouse=True)
def working_precision():
    # test-side arithmetic on library results runs above the library's 128-bit default
    with mp.workprec(192):
        yield
