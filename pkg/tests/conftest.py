import pytest

from streampca import _backend


@pytest.fixture(params=_backend.available_backends())
def backend(request):
    """Run the decorated test once per importable kernel backend."""
    previous = _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(previous)
