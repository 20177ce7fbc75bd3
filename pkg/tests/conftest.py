import pytest

from _support import ONE_HOT_LABELS
from mrgd.backends.fixtures import FixtureEmbedBackend
from mrgd.backends.protocol import EmbedRequest


@pytest.fixture(scope="session")
def one_hot_backend():
    return FixtureEmbedBackend.one_hot(ONE_HOT_LABELS)


@pytest.fixture(scope="session")
def one_hot_provider(one_hot_backend):
    return lambda labels: one_hot_backend.embed(EmbedRequest(tuple(labels)))
