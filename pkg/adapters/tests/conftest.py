import pytest
from fastapi.testclient import TestClient

from _adapter_support import replay_engine
from mrgd_adapters import CAPABILITY_PATHS, create_app


@pytest.fixture(params=sorted(CAPABILITY_PATHS))
def capability(request):
    return request.param


@pytest.fixture
def replay_client(capability):
    app = create_app(capability, replay_engine(capability))
    return capability, TestClient(app)
