import pytest

from maslov_lab import corpus
from maslov_lab.iteration import SystemIndexCache

ACCEPTANCE_COUNT = 51
ACCEPTANCE_SEED = corpus.DEFAULT_SEED


@pytest.fixture(scope="session")
def acceptance_corpus():
    """The shared randomized corpus: 51 systems, n cycling over 1,2,3,
    with per-system index caches reused across criteria."""
    systems = corpus.corpus(ACCEPTANCE_COUNT, seed=ACCEPTANCE_SEED)
    return [(B, SystemIndexCache(B)) for B in systems]


@pytest.fixture(scope="session")
def small_corpus():
    systems = corpus.corpus(9, seed=1234)
    return [(B, SystemIndexCache(B)) for B in systems]
